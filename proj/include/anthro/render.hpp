// Orthographic software rasterizer producing the regressor's input images,
// plus binary PGM (P5) I/O. Output is deterministic: fixed iteration order,
// double arithmetic, no contraction (see the build flags).
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "anthro/types.hpp"

namespace anthro {

struct CameraConfig {
  int resolution = 200;     // square image, pixels
  double ortho_scale = 2.5;  // world meters spanned by the image
  double camera_distance = 6.0;  // +z, looking toward -z; provenance only
  uint8_t background = 0;
  // Inert under a pure orthographic model; recorded for provenance.
  double focal_length_mm = 60.0;
  double sensor_size_mm = 32.0;
};

struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> pixels;  // row-major, row 0 at the top

  uint8_t at(int row, int col) const { return pixels[row * width + col]; }
};

// Depth-buffered orthographic render over a scale x scale window centered on
// the mesh bounds' (x, y) center. Shading is a headlight Lambert term:
// 255 * max(0, n . l) with l the unit direction from surface to camera (+z).
GrayImage render_orthographic(const TriMesh& mesh, const CameraConfig& cam);

// Binary PGM, maxval 255, byte-exact round trip. A non-empty comment is
// written as a `#` header line (deterministic content only).
void write_pgm(const GrayImage& img, const std::string& path,
               const std::string& comment = {});
GrayImage read_pgm(const std::string& path);

}  // namespace anthro
