#include <cstdio>

int main() {
  std::puts("nsdt cli: subcommands pending");
  return 0;
}
