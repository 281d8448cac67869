#pragma once

#include <filesystem>

#include "cvpyr/camera.hpp"
#include "cvpyr/image.hpp"

namespace cvpyr {

namespace fs = std::filesystem;

/// Reads a PFM file ("Pf" grey or "PF" colour). The sign of the scale field
/// selects endianness (negative = little-endian). Rows come back top-to-bottom.
/// Rejects malformed headers, truncated payloads and non-finite samples.
Image read_pfm(const fs::path& path);
/// Writes little-endian PFM ("Pf" or "PF" depending on channel count).
void write_pfm(const fs::path& path, const Image& img);

/// 8-bit binary PGM (P5) or PPM (P6); samples are mapped to [0, 1].
Image read_pnm(const fs::path& path);
void write_pnm(const fs::path& path, const Image& img);

/// 8-bit PNG (grey, grey+alpha, RGB, RGBA or palette; alpha is dropped).
Image read_png(const fs::path& path);
void write_png(const fs::path& path, const Image& img);

/// Dispatches on extension: .pfm, .pgm/.ppm/.pnm, .png.
Image read_image(const fs::path& path);

/// DTU cam.txt layout:
///
///     extrinsic
///     r11 r12 r13 t1
///     r21 r22 r23 t2
///     r31 r32 r33 t3
///     0 0 0 1
///
///     intrinsic
///     fx s  cx
///     0  fy cy
///     0  0  1
///
///     depth_min interval [num_planes [depth_max]]
///
/// With four depth values depth_max is taken verbatim; with three it is
/// depth_min + interval * (num_planes - 1); with two, depth_min + interval * 191.
/// Rotations off orthonormal by more than 1e-6 are rejected; small residuals
/// above 1e-9 are projected onto the nearest rotation.
CameraParams read_camera_dtu(const fs::path& path);
/// Writes the four-value depth line with `num_planes` planes; every number is
/// printed with round-trip precision.
void write_camera_dtu(const fs::path& path, const CameraParams& cam, int num_planes = 192);

}  // namespace cvpyr
