#include "flatcam/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include "flatcam/errors.hpp"

namespace flatcam {

namespace {

constexpr std::string_view kMatrixMagic{"FCMAT1\n\0", 8};
constexpr std::string_view kVolumeMagic{"FCVOL1\n\0", 8};
constexpr std::size_t kMaxHeader = 64;

void put_double(std::string& out, double v) {
  auto bits = std::bit_cast<std::uint64_t>(v);
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
  char bytes[8];
  std::memcpy(bytes, &bits, 8);
  out.append(bytes, 8);
}

double get_double(const char* p) {
  std::uint64_t bits;
  std::memcpy(&bits, p, 8);
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
  return std::bit_cast<double>(bits);
}

// Parses "<magic><a> <b> ...\n" and returns the dimensions and payload view.
struct Header {
  std::vector<std::uint64_t> dims;
  std::string_view payload;
};

Header parse_header(std::string_view bytes, std::string_view magic, std::size_t n_dims, const char* what) {
  if (bytes.size() < magic.size() || bytes.substr(0, magic.size()) != magic)
    throw FormatError(std::string(what) + ": bad magic");
  const std::string_view rest = bytes.substr(magic.size());
  const auto eol = rest.find('\n');
  if (eol == std::string_view::npos || eol > kMaxHeader)
    throw FormatError(std::string(what) + ": missing or oversized header line");
  const std::string_view line = rest.substr(0, eol);

  Header h;
  std::size_t pos = 0;
  for (std::size_t i = 0; i < n_dims; ++i) {
    if (i > 0) {
      if (pos >= line.size() || line[pos] != ' ') throw FormatError(std::string(what) + ": malformed header");
      ++pos;
    }
    std::uint64_t value = 0;
    const char* begin = line.data() + pos;
    const auto [ptr, ec] = std::from_chars(begin, line.data() + line.size(), value);
    if (ec != std::errc{} || ptr == begin) throw FormatError(std::string(what) + ": malformed header");
    pos = static_cast<std::size_t>(ptr - line.data());
    h.dims.push_back(value);
  }
  if (pos != line.size()) throw FormatError(std::string(what) + ": trailing characters in header");

  // Guard the element count before multiplying by 8.
  std::uint64_t count = 1;
  for (auto d : h.dims) {
    if (d > static_cast<std::uint64_t>(std::numeric_limits<int>::max()))
      throw FormatError(std::string(what) + ": dimension too large");
    if (d != 0 && count > (std::numeric_limits<std::uint64_t>::max() / 8) / d)
      throw FormatError(std::string(what) + ": dimensions overflow");
    count *= d;
  }
  h.payload = rest.substr(eol + 1);
  if (h.payload.size() != count * 8)
    throw FormatError(std::string(what) + ": payload length mismatch, expected " + std::to_string(count * 8) +
                      " bytes, got " + std::to_string(h.payload.size()));
  return h;
}

}  // namespace

std::string encode_matrix(const Matrix& m) {
  std::string out(kMatrixMagic);
  out += std::to_string(m.rows()) + " " + std::to_string(m.cols()) + "\n";
  out.reserve(out.size() + static_cast<std::size_t>(m.size()) * 8);
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) put_double(out, m(r, c));
  return out;
}

Matrix decode_matrix(std::string_view bytes) {
  const Header h = parse_header(bytes, kMatrixMagic, 2, "FCMAT");
  const auto rows = static_cast<Eigen::Index>(h.dims[0]);
  const auto cols = static_cast<Eigen::Index>(h.dims[1]);
  Matrix m(rows, cols);
  const char* p = h.payload.data();
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c, p += 8) m(r, c) = get_double(p);
  return m;
}

std::string encode_volume(const Volume& v) {
  std::string out(kVolumeMagic);
  out += std::to_string(v.nx()) + " " + std::to_string(v.ny()) + " " + std::to_string(v.n_depths()) + "\n";
  out.reserve(out.size() + static_cast<std::size_t>(v.nx()) * v.ny() * v.n_depths() * 8);
  for (int x = 0; x < v.nx(); ++x)
    for (int y = 0; y < v.ny(); ++y)
      for (int k = 0; k < v.n_depths(); ++k) put_double(out, v(x, y, k));
  return out;
}

Volume decode_volume(std::string_view bytes) {
  const Header h = parse_header(bytes, kVolumeMagic, 3, "FCVOL");
  Volume v(static_cast<int>(h.dims[0]), static_cast<int>(h.dims[1]), static_cast<int>(h.dims[2]));
  const char* p = h.payload.data();
  for (int x = 0; x < v.nx(); ++x)
    for (int y = 0; y < v.ny(); ++y)
      for (int k = 0; k < v.n_depths(); ++k, p += 8) v(x, y, k) = get_double(p);
  return v;
}

namespace {

std::string format_exact(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto eol = text.find('\n', pos);
    if (eol == std::string_view::npos) {
      lines.push_back(text.substr(pos));
      break;
    }
    lines.push_back(text.substr(pos, eol - pos));
    pos = eol + 1;
  }
  return lines;
}

template <typename T>
T field_value(std::istringstream& in, const char* name) {
  std::string label;
  std::string token;
  if (!(in >> label) || label != name || !(in >> token))
    throw FormatError(std::string("FCMASK: expected field '") + name + "'");
  T value{};
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc{} || ptr != token.data() + token.size())
    throw FormatError(std::string("FCMASK: bad value for '") + name + "'");
  return value;
}

}  // namespace

std::string encode_mask(const MaskSpec& mask) {
  std::string out = "FCMASK 1\n";
  out += "features " + std::to_string(mask.bits.size()) + " pitch_mm " + format_exact(mask.pitch) + " offset_mm " +
         format_exact(mask.offset) + " seed " + std::to_string(mask.seed) + " symmetric " +
         (mask.symmetric ? "1" : "0") + "\n";
  for (auto b : mask.bits) out += b ? '1' : '0';
  out += '\n';
  return out;
}

MaskSpec decode_mask(std::string_view text) {
  const auto lines = split_lines(text);
  if (lines.empty() || lines[0].substr(0, 7) != "FCMASK ") throw FormatError("FCMASK: bad magic");
  if (lines[0] != "FCMASK 1") throw FormatError("FCMASK: unsupported version '" + std::string(lines[0].substr(7)) + "'");
  if (lines.size() != 3) throw FormatError("FCMASK: expected 3 lines, got " + std::to_string(lines.size()));

  std::istringstream in{std::string(lines[1])};
  MaskSpec mask;
  const auto features = field_value<std::uint64_t>(in, "features");
  mask.pitch = field_value<double>(in, "pitch_mm");
  mask.offset = field_value<double>(in, "offset_mm");
  mask.seed = field_value<std::uint64_t>(in, "seed");
  const auto symmetric = field_value<int>(in, "symmetric");
  std::string extra;
  if (in >> extra) throw FormatError("FCMASK: trailing fields");
  if (symmetric != 0 && symmetric != 1) throw FormatError("FCMASK: symmetric must be 0 or 1");
  mask.symmetric = symmetric == 1;

  const std::string_view bits = lines[2];
  if (bits.size() != features)
    throw FormatError("FCMASK: expected " + std::to_string(features) + " bits, got " + std::to_string(bits.size()));
  mask.bits.reserve(bits.size());
  for (char c : bits) {
    if (c != '0' && c != '1') throw FormatError("FCMASK: bits must be '0' or '1'");
    mask.bits.push_back(c == '1' ? 1 : 0);
  }
  try {
    mask.validate();
  } catch (const ValidationError& e) {
    throw FormatError(std::string("FCMASK: ") + e.what());
  }
  return mask;
}

std::string encode_measurements(const Measurements& images) {
  if (images.empty()) throw DimensionError("no sensor images to encode");
  const auto m = images.front().rows();
  Volume v(static_cast<int>(m), static_cast<int>(m), static_cast<int>(images.size()));
  for (std::size_t c = 0; c < images.size(); ++c) {
    if (images[c].rows() != m || images[c].cols() != m)
      throw DimensionError("sensor images must share one square size");
    v.slice(static_cast<int>(c)) = images[c];
  }
  return encode_volume(v);
}

Measurements decode_measurements(std::string_view bytes) {
  const Volume v = decode_volume(bytes);
  if (v.nx() != v.ny()) throw FormatError("measurements: sensor images must be square");
  Measurements images;
  for (int c = 0; c < v.n_depths(); ++c) images.push_back(v.slice(c));
  return images;
}

std::string encode_depth_map(const DepthMap& map) { return encode_matrix(map.cast<double>()); }

DepthMap decode_depth_map(std::string_view bytes) {
  const Matrix m = decode_matrix(bytes);
  DepthMap out(m.rows(), m.cols());
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      const double v = m(r, c);
      if (!(v >= -1.0 && v <= std::numeric_limits<int>::max()) || v != std::floor(v))
        throw FormatError("depth map: entries must be integers >= -1");
      out(r, c) = static_cast<int>(v);
    }
  return out;
}

std::string encode_pgm(const Matrix& image, double peak) {
  // Rows of the image become PGM rows.
  std::string out = "P5\n" + std::to_string(image.cols()) + " " + std::to_string(image.rows()) + "\n255\n";
  for (Eigen::Index r = 0; r < image.rows(); ++r)
    for (Eigen::Index c = 0; c < image.cols(); ++c) {
      double scaled = peak > 0.0 ? image(r, c) / peak * 255.0 : 0.0;
      if (!std::isfinite(scaled)) scaled = 0.0;
      out += static_cast<char>(static_cast<unsigned char>(std::lround(std::clamp(scaled, 0.0, 255.0))));
    }
  return out;
}

std::string encode_residual_csv(const std::vector<double>& residuals) {
  std::string out = "iter,residual\n";
  for (std::size_t i = 0; i < residuals.size(); ++i) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%zu,%.17g\n", i + 1, residuals[i]);
    out += buf;
  }
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("error reading '" + path.string() + "'");
  return std::move(buf).str();
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("error writing '" + path.string() + "'");
}

}  // namespace flatcam
