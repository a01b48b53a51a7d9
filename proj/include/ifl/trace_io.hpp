#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ifl/error.hpp"
#include "ifl/repsim.hpp"

namespace ifl::io {

/// Binary activation-trace container:
///   magic "IFLT\0" | version u16 LE (=1) | header length u32 LE |
///   UTF-8 JSON header {model, layer, rows, cols, dtype:"f32le",
///   token_meta:[{modality, language}]} | rows*cols float32 LE row-major.
inline constexpr char kTraceMagic[5] = {'I', 'F', 'L', 'T', '\0'};
inline constexpr std::uint16_t kTraceVersion = 1;

/// The five corruption classes a reader distinguishes.
class TraceError : public Error {
 public:
  enum class Kind {
    bad_magic,
    bad_version,
    bad_header,       // truncated or malformed header, wrong dtype
    bad_payload,      // payload byte length != rows*cols*4
    token_meta_mismatch,
  };
  TraceError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

namespace detail {

inline void put_u16le(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>((v >> 8) & 0xFF));
}

inline void put_u32le(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

inline void put_f32le(std::string& out, float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, sizeof(bits));
  put_u32le(out, bits);
}

inline std::uint16_t get_u16le(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

inline std::uint32_t get_u32le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline float get_f32le(const unsigned char* p) {
  const std::uint32_t bits = get_u32le(p);
  float v;
  std::memcpy(&v, &bits, sizeof(v));
  return v;
}

}  // namespace detail

inline std::string encode_trace(const repsim::ActivationTrace& trace) {
  trace.validate();
  nlohmann::json header;
  header["model"] = trace.model;
  header["layer"] = trace.layer;
  header["rows"] = trace.hidden.rows();
  header["cols"] = trace.hidden.cols();
  header["dtype"] = "f32le";
  nlohmann::json meta = nlohmann::json::array();
  for (const auto& m : trace.token_meta) {
    meta.push_back({{"modality", repsim::to_string(m.modality)},
                    {"language", langid::to_string(m.language)}});
  }
  header["token_meta"] = meta;
  const std::string header_str = header.dump();

  std::string out;
  out.append(kTraceMagic, sizeof(kTraceMagic));
  detail::put_u16le(out, kTraceVersion);
  detail::put_u32le(out, static_cast<std::uint32_t>(header_str.size()));
  out.append(header_str);
  for (double v : trace.hidden.data()) detail::put_f32le(out, static_cast<float>(v));
  return out;
}

inline void write_trace(const repsim::ActivationTrace& trace, const std::string& path) {
  const std::string bytes = encode_trace(trace);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

inline repsim::ActivationTrace decode_trace(const std::string& bytes) {
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  if (bytes.size() < sizeof(kTraceMagic) + 6 ||
      std::memcmp(bytes.data(), kTraceMagic, sizeof(kTraceMagic)) != 0)
    throw TraceError(TraceError::Kind::bad_magic, "bad magic");
  std::size_t off = sizeof(kTraceMagic);
  const std::uint16_t version = detail::get_u16le(p + off);
  off += 2;
  if (version != kTraceVersion)
    throw TraceError(TraceError::Kind::bad_version,
                     "unsupported trace version " + std::to_string(version));
  const std::uint32_t header_len = detail::get_u32le(p + off);
  off += 4;
  if (bytes.size() < off + header_len)
    throw TraceError(TraceError::Kind::bad_header, "truncated header");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.substr(off, header_len));
  } catch (const nlohmann::json::exception& e) {
    throw TraceError(TraceError::Kind::bad_header, std::string("malformed header: ") + e.what());
  }
  off += header_len;

  repsim::ActivationTrace trace;
  try {
    trace.model = header.at("model").get<std::string>();
    trace.layer = header.at("layer").get<std::size_t>();
    const auto rows = header.at("rows").get<std::size_t>();
    const auto cols = header.at("cols").get<std::size_t>();
    if (header.at("dtype").get<std::string>() != "f32le")
      throw TraceError(TraceError::Kind::bad_header, "unsupported dtype");
    trace.hidden = Matrix(rows, cols);
    for (const auto& m : header.at("token_meta")) {
      repsim::TokenMeta meta;
      meta.modality = repsim::modality_from_string(m.at("modality").get<std::string>());
      meta.language = langid::language_from_string(m.at("language").get<std::string>());
      trace.token_meta.push_back(meta);
    }
  } catch (const TraceError&) {
    throw;
  } catch (const std::exception& e) {
    throw TraceError(TraceError::Kind::bad_header, std::string("malformed header: ") + e.what());
  }
  if (trace.token_meta.size() != trace.hidden.rows())
    throw TraceError(TraceError::Kind::token_meta_mismatch, "token_meta length mismatch");

  const std::size_t expected = trace.hidden.rows() * trace.hidden.cols() * 4;
  if (bytes.size() - off != expected)
    throw TraceError(TraceError::Kind::bad_payload,
                     "payload size mismatch: expected " + std::to_string(expected) +
                         " bytes, found " + std::to_string(bytes.size() - off));
  for (std::size_t i = 0; i < trace.hidden.data().size(); ++i)
    trace.hidden.data()[i] = static_cast<double>(detail::get_f32le(p + off + 4 * i));
  return trace;
}

inline repsim::ActivationTrace read_trace(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_trace(bytes);
}

}  // namespace ifl::io
