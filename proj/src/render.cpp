#include "anthro/render.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

namespace anthro {

GrayImage render_orthographic(const TriMesh& mesh, const CameraConfig& cam) {
  if (cam.resolution <= 0) throw DataError("resolution must be positive");
  if (!(cam.ortho_scale > 0)) throw DataError("orthographic scale must be positive");
  const int res = cam.resolution;
  const Aabb box = compute_aabb(mesh);
  const double cx = box.center().x();
  const double cy = box.center().y();
  const double px_size = cam.ortho_scale / res;

  GrayImage img;
  img.width = img.height = res;
  img.pixels.assign(static_cast<size_t>(res) * res, cam.background);
  std::vector<double> depth(static_cast<size_t>(res) * res,
                            -std::numeric_limits<double>::infinity());

  auto col_of = [&](double x) { return (x - cx) / px_size + 0.5 * res - 0.5; };
  auto row_of = [&](double y) { return 0.5 * res - 0.5 - (y - cy) / px_size; };

  for (Eigen::Index f = 0; f < mesh.num_faces(); ++f) {
    Vec3 a, b, c;
    mesh.corners(f, a, b, c);
    const Vec3 normal = (b - a).cross(c - a);
    const double nlen = normal.norm();
    if (nlen == 0.0) continue;
    // headlight: light direction = +z (surface toward camera)
    const double shade = normal.z() / nlen;
    if (shade <= 0.0) continue;  // back-facing or edge-on
    const uint8_t intensity =
        static_cast<uint8_t>(std::min(255.0, std::floor(255.0 * shade + 0.5)));

    // screen-space bounding box of the triangle, pixel centers
    const double ax = col_of(a.x()), ay = row_of(a.y());
    const double bx = col_of(b.x()), by = row_of(b.y());
    const double cxs = col_of(c.x()), cys = row_of(c.y());
    const int col0 = std::max(0, (int)std::ceil(std::min({ax, bx, cxs})));
    const int col1 = std::min(res - 1, (int)std::floor(std::max({ax, bx, cxs})));
    const int row0 = std::max(0, (int)std::ceil(std::min({ay, by, cys})));
    const int row1 = std::min(res - 1, (int)std::floor(std::max({ay, by, cys})));
    if (col0 > col1 || row0 > row1) continue;

    const double area =
        (bx - ax) * (cys - ay) - (by - ay) * (cxs - ax);
    if (area == 0.0) continue;
    const double inv_area = 1.0 / area;

    for (int r = row0; r <= row1; ++r) {
      for (int col = col0; col <= col1; ++col) {
        const double px = col, py = r;
        const double w0 =
            ((bx - px) * (cys - py) - (by - py) * (cxs - px)) * inv_area;
        const double w1 =
            ((cxs - px) * (ay - py) - (cys - py) * (ax - px)) * inv_area;
        const double w2 = 1.0 - w0 - w1;
        if (w0 < 0.0 || w1 < 0.0 || w2 < 0.0) continue;
        const double z = w0 * a.z() + w1 * b.z() + w2 * c.z();
        const size_t idx = static_cast<size_t>(r) * res + col;
        if (z > depth[idx]) {
          depth[idx] = z;
          img.pixels[idx] = intensity;
        }
      }
    }
  }
  return img;
}

void write_pgm(const GrayImage& img, const std::string& path,
               const std::string& comment) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write image: " + path);
  out << "P5\n";
  if (!comment.empty()) out << "# " << comment << "\n";
  out << img.width << " " << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.pixels.data()),
            static_cast<std::streamsize>(img.pixels.size()));
  if (!out) throw Error("short write: " + path);
}

GrayImage read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open image: " + path);
  std::string magic;
  in >> magic;
  if (magic != "P5") throw ParseError(path + ": not a binary PGM (P5)");
  // skip whitespace and '#' comments between header tokens
  auto next_int = [&](int& v) {
    while (true) {
      int ch = in.peek();
      if (ch == '#') {
        std::string comment;
        std::getline(in, comment);
      } else if (std::isspace(ch)) {
        in.get();
      } else {
        break;
      }
    }
    if (!(in >> v)) throw ParseError(path + ": malformed PGM header");
  };
  int w = 0, h = 0, maxval = 0;
  next_int(w);
  next_int(h);
  next_int(maxval);
  if (w <= 0 || h <= 0 || maxval != 255)
    throw ParseError(path + ": unsupported PGM geometry/maxval");
  in.get();  // single whitespace after maxval
  GrayImage img;
  img.width = w;
  img.height = h;
  img.pixels.resize(static_cast<size_t>(w) * h);
  in.read(reinterpret_cast<char*>(img.pixels.data()),
          static_cast<std::streamsize>(img.pixels.size()));
  if (in.gcount() != static_cast<std::streamsize>(img.pixels.size()))
    throw ParseError(path + ": truncated pixel data");
  return img;
}

}  // namespace anthro
