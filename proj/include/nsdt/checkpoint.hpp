#pragma once

#include <bit>
#include <cstdint>
#include <fstream>
#include <string>

#include <json.hpp>

#include "nsdt/common.hpp"
#include "nsdt/nn.hpp"

namespace nsdt {

static_assert(std::endian::native == std::endian::little,
              "checkpoint payload is little-endian float32");

// Checkpoint layout: one line of JSON (segment names, shapes, caller metadata,
// format version), then the raw little-endian float32 payload in segment
// order. Round-trips are bit-exact.
inline void save_checkpoint(const std::string& path, const ParamStore<float>& params,
                            const nlohmann::json& meta) {
  nlohmann::json header;
  header["format_version"] = 1;
  header["dtype"] = "f32";
  header["meta"] = meta;
  header["segments"] = nlohmann::json::array();
  for (const auto& seg : params.segments())
    header["segments"].push_back({{"name", seg.name}, {"shape", seg.shape}});

  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write checkpoint: " + path);
  std::string h = header.dump();
  out.write(h.data(), std::streamsize(h.size()));
  out.put('\n');
  out.write(reinterpret_cast<const char*>(params.values().data()),
            std::streamsize(params.size() * sizeof(float)));
  if (!out) throw ConfigError("short write on checkpoint: " + path);
}

struct Checkpoint {
  ParamStore<float> params;
  nlohmann::json meta;
};

inline Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("missing checkpoint artifact: " + path);
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("truncated checkpoint header: " + path);
  nlohmann::json header = nlohmann::json::parse(line);
  if (header.at("format_version").get<int>() != 1)
    throw ConfigError("unsupported checkpoint version in " + path);
  if (header.at("dtype").get<std::string>() != "f32")
    throw ConfigError("unsupported checkpoint dtype in " + path);

  Checkpoint ck;
  ck.meta = header.value("meta", nlohmann::json::object());
  for (const auto& seg : header.at("segments"))
    ck.params.add(seg.at("name").get<std::string>(), seg.at("shape").get<std::vector<int64_t>>());
  in.read(reinterpret_cast<char*>(ck.params.values().data()),
          std::streamsize(ck.params.size() * sizeof(float)));
  if (size_t(in.gcount()) != ck.params.size() * sizeof(float))
    throw ConfigError("truncated checkpoint payload: " + path);
  return ck;
}

}  // namespace nsdt
