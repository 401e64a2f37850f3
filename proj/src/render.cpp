#include "canonimanip/render.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

#include "canonimanip/errors.hpp"

namespace canonimanip {

CameraSpec orbit_camera(const Vec3& center, double azimuth, double elevation, double distance,
                        double vertical_fov, int width, int height) {
  CameraSpec cam;
  cam.look_at = center;
  cam.eye = center + distance * Vec3(std::cos(elevation) * std::cos(azimuth),
                                     std::cos(elevation) * std::sin(azimuth), std::sin(elevation));
  cam.up = Vec3::UnitZ();
  cam.vertical_fov = vertical_fov;
  cam.width = width;
  cam.height = height;
  return cam;
}

RenderedImage::RenderedImage(int w, int h, Rgb fill) : width(w), height(h) {
  pixels.resize(static_cast<std::size_t>(3) * w * h);
  for (std::size_t i = 0; i < pixels.size(); i += 3) {
    pixels[i] = fill.r;
    pixels[i + 1] = fill.g;
    pixels[i + 2] = fill.b;
  }
}

Rgb RenderedImage::at(int x, int y) const {
  const std::size_t i = 3 * (static_cast<std::size_t>(y) * width + x);
  return {pixels[i], pixels[i + 1], pixels[i + 2]};
}

void RenderedImage::set(int x, int y, Rgb c) {
  if (!contains(x, y)) return;
  const std::size_t i = 3 * (static_cast<std::size_t>(y) * width + x);
  pixels[i] = c.r;
  pixels[i + 1] = c.g;
  pixels[i + 2] = c.b;
}

namespace {

constexpr int kPointRadius = 1;
constexpr int kDiscRadius = 2;  // 5 px across
constexpr int kArrowLength = 30;
constexpr int kArrowHead = 8;
constexpr double kArrowProbe = 0.05;  // m, world step used to find the screen direction
// cos/sin(30 deg) as literals: no libm in the rasterization path.
constexpr double kCos30 = 0.86602540378443864676;
constexpr double kSin30 = 0.5;

struct Projector {
  Vec3 eye, forward, right, up;
  double focal;
  double cx, cy;

  explicit Projector(const CameraSpec& cam) {
    if (cam.width < 16 || cam.height < 16) throw InvalidArgument("camera image must be at least 16x16");
    if (!(cam.vertical_fov > 0.0 && cam.vertical_fov < M_PI)) {
      throw InvalidArgument("camera field of view must lie in (0, pi)");
    }
    const Vec3 f = cam.look_at - cam.eye;
    if (f.norm() < 1e-12) throw DegenerateCamera("camera eye coincides with look_at");
    forward = f.normalized();
    const Vec3 r = forward.cross(cam.up);
    if (r.norm() < 1e-9 * std::max(1.0, cam.up.norm())) {
      throw DegenerateCamera("camera up vector is parallel to the view direction");
    }
    right = r.normalized();
    up = right.cross(forward);
    eye = cam.eye;
    focal = 0.5 * cam.height / std::tan(0.5 * cam.vertical_fov);
    cx = 0.5 * cam.width;
    cy = 0.5 * cam.height;
  }

  struct Screen {
    double x, y, depth;
  };

  std::optional<Screen> project(const Vec3& p) const {
    const Vec3 d = p - eye;
    const double z = d.dot(forward);
    if (z <= 1e-6) return std::nullopt;
    return Screen{cx + focal * d.dot(right) / z, cy - focal * d.dot(up) / z, z};
  }
};

struct Splat {
  double depth;
  std::size_t index;
  int x, y;
  Rgb color;
};

struct Segment {
  int x0, y0, x1, y1;
};

struct Marker {
  int x, y;
  Rgb color;
};

// Resolved draw list, shared by the raster and SVG back ends.
struct DrawList {
  std::vector<Splat> splats;  // already in painter order
  std::vector<Marker> discs;
  std::vector<Segment> arrows;
};

int to_pixel(double v) { return static_cast<int>(std::floor(v)); }

void add_primitive(DrawList& out, const Projector& proj, const WorldPrimitive& wp) {
  const auto p0 = proj.project(wp.point);
  if (!p0) return;
  const int x0 = to_pixel(p0->x), y0 = to_pixel(p0->y);
  out.discs.push_back({x0, y0, palette::kInteractionPoint});
  const auto p1 = proj.project(wp.point + kArrowProbe * wp.direction);
  if (!p1) return;
  const double dx = p1->x - p0->x, dy = p1->y - p0->y;
  const double len = std::sqrt(dx * dx + dy * dy);
  if (len < 1e-9) return;  // pointing straight at the camera
  const double ux = dx / len, uy = dy / len;
  const int x1 = x0 + static_cast<int>(std::lround(kArrowLength * ux));
  const int y1 = y0 + static_cast<int>(std::lround(kArrowLength * uy));
  out.arrows.push_back({x0, y0, x1, y1});
  // Two barbs at +/-30 degrees from the reversed shaft.
  for (const double sgn : {1.0, -1.0}) {
    const double bx = -ux * kCos30 - sgn * (-uy) * kSin30;
    const double by = -uy * kCos30 + sgn * (-ux) * kSin30;
    out.arrows.push_back({x1, y1, x1 + static_cast<int>(std::lround(kArrowHead * bx)),
                          y1 + static_cast<int>(std::lround(kArrowHead * by))});
  }
}

DrawList build_draw_list(const Scene& scene, const SpatialConstraint* candidate,
                         const std::optional<Pose>& active_at_target, const Projector& proj) {
  if (candidate != nullptr) {
    scene.at(candidate->active.object_id);
    scene.at(candidate->passive.object_id);
    if (!active_at_target) throw InvalidArgument("render: candidate given without a target pose");
  }

  DrawList out;
  std::size_t index = 0;
  std::optional<SceneObject> placed_active;
  const SceneObject* passive = nullptr;
  for (const SceneObject& obj : scene.objects) {
    SceneObject drawn = obj;
    Rgb color = palette::kObstacle;
    if (candidate != nullptr && obj.id() == candidate->active.object_id) {
      drawn.pose = *active_at_target;
      color = palette::kActive;
      placed_active = drawn;
    } else if (candidate != nullptr && obj.id() == candidate->passive.object_id) {
      color = palette::kPassive;
      passive = &obj;
    }
    for (const Vec3& p : drawn.object->points) {
      const auto s = proj.project(drawn.to_world(p));
      if (s) out.splats.push_back({s->depth, index, to_pixel(s->x), to_pixel(s->y), color});
      ++index;
    }
  }
  std::stable_sort(out.splats.begin(), out.splats.end(), [](const Splat& a, const Splat& b) {
    if (a.depth != b.depth) return a.depth > b.depth;
    return a.index < b.index;
  });

  if (candidate != nullptr) {
    // The active primitive may belong to the same object as the passive one
    // (e.g. a self-referential constraint), so resolve both independently.
    const SceneObject& active_obj = placed_active ? *placed_active : scene.at(candidate->active.object_id);
    const SceneObject& passive_obj = passive ? *passive : scene.at(candidate->passive.object_id);
    add_primitive(out, proj, primitive_to_world(candidate->passive.primitive, passive_obj));
    add_primitive(out, proj, primitive_to_world(candidate->active.primitive, active_obj));
  }
  return out;
}

void fill_disc(RenderedImage& img, int cx, int cy, int r, Rgb c) {
  for (int dy = -r; dy <= r; ++dy) {
    for (int dx = -r; dx <= r; ++dx) {
      if (dx * dx + dy * dy <= r * r) img.set(cx + dx, cy + dy, c);
    }
  }
}

// Bresenham; integer only.
void draw_line(RenderedImage& img, int x0, int y0, int x1, int y1, Rgb c) {
  const int dx = std::abs(x1 - x0), sx = x0 < x1 ? 1 : -1;
  const int dy = -std::abs(y1 - y0), sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  while (true) {
    img.set(x0, y0, c);
    if (x0 == x1 && y0 == y1) break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x0 += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y0 += sy;
    }
  }
}

int grid_spacing(const CameraSpec& cam) { return std::max(1, cam.width / 8); }

}  // namespace

RenderedImage render_interaction(const Scene& scene, const SpatialConstraint* candidate,
                                 const std::optional<Pose>& active_at_target, const CameraSpec& camera,
                                 bool grid) {
  const Projector proj(camera);
  const DrawList list = build_draw_list(scene, candidate, active_at_target, proj);

  RenderedImage img(camera.width, camera.height, palette::kBackground);
  for (const Splat& s : list.splats) fill_disc(img, s.x, s.y, kPointRadius, s.color);
  for (const Segment& a : list.arrows) draw_line(img, a.x0, a.y0, a.x1, a.y1, palette::kArrow);
  for (const Marker& d : list.discs) fill_disc(img, d.x, d.y, kDiscRadius, d.color);
  if (grid) {
    const int step = grid_spacing(camera);
    for (int x = step; x < camera.width; x += step) draw_line(img, x, 0, x, camera.height - 1, palette::kGrid);
    for (int y = step; y < camera.height; y += step) draw_line(img, 0, y, camera.width - 1, y, palette::kGrid);
  }
  return img;
}

std::string render_interaction_svg(const Scene& scene, const SpatialConstraint* candidate,
                                   const std::optional<Pose>& active_at_target, const CameraSpec& camera,
                                   bool grid) {
  const Projector proj(camera);
  const DrawList list = build_draw_list(scene, candidate, active_at_target, proj);
  auto rgb = [](Rgb c) {
    return "rgb(" + std::to_string(c.r) + "," + std::to_string(c.g) + "," + std::to_string(c.b) + ")";
  };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << camera.width << "\" height=\"" << camera.height
     << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"" << rgb(palette::kBackground) << "\"/>\n";
  for (const Splat& s : list.splats) {
    os << "<circle cx=\"" << s.x << "\" cy=\"" << s.y << "\" r=\"" << kPointRadius << "\" fill=\"" << rgb(s.color)
       << "\"/>\n";
  }
  for (const Segment& a : list.arrows) {
    os << "<line x1=\"" << a.x0 << "\" y1=\"" << a.y0 << "\" x2=\"" << a.x1 << "\" y2=\"" << a.y1
       << "\" stroke=\"" << rgb(palette::kArrow) << "\"/>\n";
  }
  for (const Marker& d : list.discs) {
    os << "<circle cx=\"" << d.x << "\" cy=\"" << d.y << "\" r=\"" << kDiscRadius << "\" fill=\""
       << rgb(d.color) << "\"/>\n";
  }
  if (grid) {
    const int step = grid_spacing(camera);
    for (int x = step; x < camera.width; x += step) {
      os << "<line x1=\"" << x << "\" y1=\"0\" x2=\"" << x << "\" y2=\"" << camera.height - 1 << "\" stroke=\""
         << rgb(palette::kGrid) << "\"/>\n";
    }
    for (int y = step; y < camera.height; y += step) {
      os << "<line x1=\"0\" y1=\"" << y << "\" x2=\"" << camera.width - 1 << "\" y2=\"" << y << "\" stroke=\""
         << rgb(palette::kGrid) << "\"/>\n";
    }
  }
  os << "</svg>\n";
  return os.str();
}

std::string encode_ppm(const RenderedImage& img) {
  std::string out = "P6\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
  out.append(reinterpret_cast<const char*>(img.pixels.data()), img.pixels.size());
  return out;
}

RenderedImage decode_ppm(const std::string& bytes) {
  std::istringstream is(bytes);
  std::string magic;
  int w = 0, h = 0, maxval = 0;
  is >> magic >> w >> h >> maxval;
  if (magic != "P6" || w <= 0 || h <= 0 || maxval != 255) throw IoError("not a binary 8-bit PPM");
  is.get();  // single whitespace after maxval
  RenderedImage img;
  img.width = w;
  img.height = h;
  img.pixels.resize(static_cast<std::size_t>(3) * w * h);
  is.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
  if (is.gcount() != static_cast<std::streamsize>(img.pixels.size())) throw IoError("truncated PPM payload");
  return img;
}

void write_ppm(const RenderedImage& img, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
  const std::string bytes = encode_ppm(img);
  os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw IoError("failed writing '" + path.string() + "'");
}

RenderedImage read_ppm(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open '" + path.string() + "'");
  const std::string bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  return decode_ppm(bytes);
}

}  // namespace canonimanip
