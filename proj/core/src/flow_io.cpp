#include "flowvs/flow_io.hpp"

#include <bit>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <string>

#include "flowvs/errors.hpp"

namespace flowvs {

namespace {

std::uint32_t load_u32(std::span<const std::uint8_t> b, std::size_t at, bool little) {
  if (little)
    return static_cast<std::uint32_t>(b[at]) | static_cast<std::uint32_t>(b[at + 1]) << 8 |
           static_cast<std::uint32_t>(b[at + 2]) << 16 | static_cast<std::uint32_t>(b[at + 3]) << 24;
  return static_cast<std::uint32_t>(b[at + 3]) | static_cast<std::uint32_t>(b[at + 2]) << 8 |
         static_cast<std::uint32_t>(b[at + 1]) << 16 | static_cast<std::uint32_t>(b[at]) << 24;
}

float load_f32(std::span<const std::uint8_t> b, std::size_t at, bool little = true) {
  return std::bit_cast<float>(load_u32(b, at, little));
}

void store_u32(Bytes& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xff));
  out.push_back(static_cast<std::uint8_t>((v >> 16) & 0xff));
  out.push_back(static_cast<std::uint8_t>((v >> 24) & 0xff));
}

void store_f32(Bytes& out, float v) { store_u32(out, std::bit_cast<std::uint32_t>(v)); }

bool flo_unknown(float u, float v) {
  return !std::isfinite(u) || !std::isfinite(v) || std::abs(u) > kFloUnknownThreshold ||
         std::abs(v) > kFloUnknownThreshold;
}

// Reads one whitespace-delimited PFM header token starting at `pos`.
std::string header_token(std::span<const std::uint8_t> b, std::size_t& pos) {
  while (pos < b.size() && std::isspace(b[pos])) ++pos;
  const std::size_t start = pos;
  while (pos < b.size() && !std::isspace(b[pos])) ++pos;
  if (start == pos) throw FormatError("pfm: truncated header", pos);
  return {reinterpret_cast<const char*>(b.data()) + start, pos - start};
}

long parse_dimension(const std::string& tok, std::size_t pos) {
  if (tok.empty() || tok.size() > 9) throw FormatError("pfm: bad dimension '" + tok + "'", pos);
  for (char c : tok)
    if (!std::isdigit(static_cast<unsigned char>(c)))
      throw FormatError("pfm: bad dimension '" + tok + "'", pos);
  const long v = std::stol(tok);
  if (v <= 0) throw FormatError("pfm: non-positive dimension", pos);
  return v;
}

}  // namespace

FlowField read_flo(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 12) throw FormatError("flo: truncated header", bytes.size());
  if (load_f32(bytes, 0) != kFloMagic) throw FormatError("flo: bad magic number", 0);
  const auto w = static_cast<std::int32_t>(load_u32(bytes, 4, true));
  const auto h = static_cast<std::int32_t>(load_u32(bytes, 8, true));
  if (w <= 0 || h <= 0 || w > (1 << 16) || h > (1 << 16))
    throw FormatError("flo: implausible dimensions", 4);
  const std::size_t n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  const std::size_t need = 12 + n * 8;
  if (bytes.size() < need) throw FormatError("flo: truncated payload", bytes.size());
  if (bytes.size() > need) throw FormatError("flo: trailing bytes", need);

  FlowField flow(w, h);
  for (std::size_t i = 0; i < n; ++i) {
    const float u = load_f32(bytes, 12 + 8 * i);
    const float v = load_f32(bytes, 16 + 8 * i);
    if (flo_unknown(u, v)) continue;
    flow.set(i, {static_cast<double>(u), static_cast<double>(v)});
  }
  return flow;
}

Bytes write_flo(const FlowField& flow) {
  Bytes out;
  out.reserve(12 + flow.size() * 8);
  store_f32(out, kFloMagic);
  store_u32(out, static_cast<std::uint32_t>(flow.width));
  store_u32(out, static_cast<std::uint32_t>(flow.height));
  for (std::size_t i = 0; i < flow.size(); ++i) {
    if (!flow.valid[i]) {
      store_f32(out, kFloUnknownValue);
      store_f32(out, kFloUnknownValue);
      continue;
    }
    store_f32(out, static_cast<float>(flow.displacement[i].x()));
    store_f32(out, static_cast<float>(flow.displacement[i].y()));
  }
  return out;
}

DepthMap read_pfm(std::span<const std::uint8_t> bytes) {
  std::size_t pos = 0;
  const std::string magic = header_token(bytes, pos);
  if (magic == "PF") throw UnsupportedFormat("pfm: color (PF) files are not supported");
  if (magic != "Pf") throw FormatError("pfm: bad magic '" + magic + "'", 0);
  const long w = parse_dimension(header_token(bytes, pos), pos);
  const long h = parse_dimension(header_token(bytes, pos), pos);
  const std::string scale_tok = header_token(bytes, pos);
  double scale = 0.0;
  try {
    std::size_t used = 0;
    scale = std::stod(scale_tok, &used);
    if (used != scale_tok.size()) throw std::invalid_argument("junk");
  } catch (const std::exception&) {
    throw FormatError("pfm: bad scale '" + scale_tok + "'", pos);
  }
  if (scale == 0.0 || !std::isfinite(scale)) throw FormatError("pfm: zero scale", pos);
  // Exactly one whitespace byte separates the header from the raster.
  if (pos >= bytes.size() || !std::isspace(bytes[pos])) throw FormatError("pfm: truncated header", pos);
  ++pos;

  const bool little = scale < 0;
  const std::size_t n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  if (bytes.size() - pos < n * 4) throw FormatError("pfm: truncated raster", bytes.size());
  if (bytes.size() - pos > n * 4) throw FormatError("pfm: trailing bytes", pos + n * 4);

  DepthMap depth(static_cast<int>(w), static_cast<int>(h));
  for (long file_row = 0; file_row < h; ++file_row) {
    const long row = h - 1 - file_row;
    for (long x = 0; x < w; ++x) {
      const std::size_t src = pos + 4 * (static_cast<std::size_t>(file_row) * w + x);
      const std::size_t dst = static_cast<std::size_t>(row) * w + x;
      const float z = load_f32(bytes, src, little);
      depth.depth[dst] = static_cast<double>(z);
      depth.valid[dst] = std::isfinite(z) && z > 0.0f ? 1 : 0;
    }
  }
  return depth;
}

Bytes write_pfm(const DepthMap& depth) {
  const std::string header =
      "Pf\n" + std::to_string(depth.width) + " " + std::to_string(depth.height) + "\n-1.0\n";
  Bytes out(header.begin(), header.end());
  out.reserve(header.size() + depth.size() * 4);
  for (int file_row = 0; file_row < depth.height; ++file_row) {
    const int row = depth.height - 1 - file_row;
    for (int x = 0; x < depth.width; ++x)
      store_f32(out, static_cast<float>(depth.depth[static_cast<std::size_t>(row) * depth.width + x]));
  }
  return out;
}

Bytes read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  Bytes data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("failed reading '" + path.string() + "'");
  return data;
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot create '" + path.string() + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace flowvs
