#pragma once

// On-disk artifacts.
//
//   FCMAT  8-byte magic "FCMAT1\n\0", ASCII "rows cols\n", rows*cols doubles
//   FCVOL  8-byte magic "FCVOL1\n\0", ASCII "nx ny k\n", nx*ny*k doubles
//          payloads are row-major IEEE-754 binary64, little-endian; for volumes
//          the last index (k) varies fastest.
//   FCMASK text: "FCMASK 1", "features N pitch_mm P offset_mm O seed S symmetric B",
//          then the bits as one line of '0'/'1'.
//   PGM    binary P5, 8-bit, linear scaling of [0, peak] to [0, 255].
//
// encode_* / decode_* work on byte buffers; read_* / write_* wrap them with file
// I/O. Decoders throw FormatError; file failures throw IoError.

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "flatcam/optics.hpp"
#include "flatcam/system_model.hpp"

namespace flatcam {

std::string encode_matrix(const Matrix& m);
Matrix decode_matrix(std::string_view bytes);

std::string encode_volume(const Volume& v);
Volume decode_volume(std::string_view bytes);

std::string encode_mask(const MaskSpec& mask);
MaskSpec decode_mask(std::string_view text);

/// Sensor images of equal size stored as an FCVOL with one slice per camera.
std::string encode_measurements(const Measurements& images);
Measurements decode_measurements(std::string_view bytes);

/// Depth indices stored as an FCMAT of integer-valued doubles (-1 = no depth).
std::string encode_depth_map(const DepthMap& map);
DepthMap decode_depth_map(std::string_view bytes);

std::string encode_pgm(const Matrix& image, double peak);

std::string encode_residual_csv(const std::vector<double>& residuals);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

inline Matrix read_matrix(const std::filesystem::path& p) { return decode_matrix(read_file(p)); }
inline void write_matrix(const std::filesystem::path& p, const Matrix& m) { write_file(p, encode_matrix(m)); }
inline Volume read_volume(const std::filesystem::path& p) { return decode_volume(read_file(p)); }
inline void write_volume(const std::filesystem::path& p, const Volume& v) { write_file(p, encode_volume(v)); }
inline MaskSpec read_mask(const std::filesystem::path& p) { return decode_mask(read_file(p)); }
inline void write_mask(const std::filesystem::path& p, const MaskSpec& m) { write_file(p, encode_mask(m)); }
inline void write_pgm(const std::filesystem::path& p, const Matrix& image, double peak) {
  write_file(p, encode_pgm(image, peak));
}

}  // namespace flatcam
