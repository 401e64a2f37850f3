#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "canonimanip/constraints.hpp"
#include "canonimanip/object_model.hpp"

namespace canonimanip {

struct CameraSpec {
  Vec3 eye{1.0, 0.0, 0.5};
  Vec3 look_at = Vec3::Zero();
  Vec3 up = Vec3::UnitZ();
  double vertical_fov = 50.0 * M_PI / 180.0;
  int width = 320;
  int height = 240;
};

// Camera on a sphere around `center`; azimuth is measured from +x toward +y,
// elevation up from the xy-plane.
CameraSpec orbit_camera(const Vec3& center, double azimuth, double elevation, double distance,
                        double vertical_fov = 50.0 * M_PI / 180.0, int width = 320, int height = 240);

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

struct RenderedImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // row-major RGB

  RenderedImage() = default;
  RenderedImage(int w, int h, Rgb fill);
  Rgb at(int x, int y) const;
  void set(int x, int y, Rgb c);
  bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width && y < height; }
};

namespace palette {
inline constexpr Rgb kBackground{240, 240, 240};
inline constexpr Rgb kActive{220, 40, 40};
inline constexpr Rgb kPassive{40, 70, 220};
inline constexpr Rgb kObstacle{128, 128, 128};
inline constexpr Rgb kArrow{0, 0, 0};
inline constexpr Rgb kInteractionPoint{0, 0, 0};
inline constexpr Rgb kGrid{200, 200, 200};
}  // namespace palette

// Point-splat depiction of the scene with the active object of `candidate`
// moved to `active_at_target`. Interaction points are 5-px discs and world
// directions 30-px arrows. Splats are painted far to near, equal depth broken
// by point index. With `candidate == nullptr` only the scene is drawn and
// every object counts as an obstacle.
//
// Throws DegenerateCamera when eye == look_at or up is parallel to the view
// direction, InvalidArgument on a malformed camera, UnknownObject when the
// candidate names an object missing from `scene`.
RenderedImage render_interaction(const Scene& scene, const SpatialConstraint* candidate,
                                 const std::optional<Pose>& active_at_target, const CameraSpec& camera,
                                 bool grid = false);

// Same content as render_interaction, as SVG.
std::string render_interaction_svg(const Scene& scene, const SpatialConstraint* candidate,
                                   const std::optional<Pose>& active_at_target, const CameraSpec& camera,
                                   bool grid = false);

// Binary PPM (P6) bytes: "P6\n<w> <h>\n255\n" followed by the raw RGB payload.
std::string encode_ppm(const RenderedImage& img);
RenderedImage decode_ppm(const std::string& bytes);
// Throws IoError.
void write_ppm(const RenderedImage& img, const std::filesystem::path& path);
RenderedImage read_ppm(const std::filesystem::path& path);

}  // namespace canonimanip
