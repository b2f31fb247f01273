#pragma once

#include <cmath>
#include <fstream>
#include <string>

#include <json.hpp>

#include "focusplan/tsdf.hpp"

namespace focusplan {

/// Depth images are stored as 16-bit binary PGM with millimeter values
/// (0 = invalid) plus a "<path>.json" sidecar holding pose and intrinsics.

inline std::string depth_sidecar_path(const std::string& pgm_path) { return pgm_path + ".json"; }

inline void save_depth_image(const DepthImage& img, const std::string& pgm_path) {
  std::ofstream out(pgm_path, std::ios::binary);
  if (!out) throw FileError("cannot open '" + pgm_path + "' for writing");
  out << "P5\n" << img.width << " " << img.height << "\n65535\n";
  for (const float d : img.depth_mm) {
    const double rounded = std::round(static_cast<double>(d));
    const auto v = static_cast<std::uint16_t>(std::clamp(rounded, 0.0, 65535.0));
    const unsigned char bytes[2] = {static_cast<unsigned char>(v >> 8),
                                    static_cast<unsigned char>(v & 0xff)};
    out.write(reinterpret_cast<const char*>(bytes), 2);
  }

  nlohmann::json sidecar;
  sidecar["pose"] = {{"position_mm", {img.pose.position.x(), img.pose.position.y(), img.pose.position.z()}},
                     {"view_dir", {img.pose.view_dir.x(), img.pose.view_dir.y(), img.pose.view_dir.z()}},
                     {"up", {img.pose.up.x(), img.pose.up.y(), img.pose.up.z()}}};
  sidecar["intrinsics"] = {{"width_px", img.intrinsics.width_px},
                           {"height_px", img.intrinsics.height_px},
                           {"pixel_pitch_mm", img.intrinsics.pixel_pitch_mm},
                           {"principal_px", {img.intrinsics.principal_x_px, img.intrinsics.principal_y_px}}};
  sidecar["focal_length_mm"] = img.focal_length_mm;
  std::ofstream side(depth_sidecar_path(pgm_path));
  if (!side) throw FileError("cannot open '" + depth_sidecar_path(pgm_path) + "' for writing");
  side << sidecar.dump(2) << "\n";
}

inline DepthImage load_depth_image(const std::string& pgm_path) {
  std::ifstream in(pgm_path, std::ios::binary);
  if (!in) throw FileError("cannot open depth image '" + pgm_path + "'");

  std::string magic;
  in >> magic;
  if (magic != "P5") throw FormatError(pgm_path, 1, "not a binary PGM (expected P5)");
  int width = 0, height = 0, maxval = 0;
  in >> width >> height >> maxval;
  if (!in || width <= 0 || height <= 0) throw FormatError(pgm_path, 2, "malformed PGM header");
  if (maxval != 65535) throw FormatError(pgm_path, 3, "expected 16-bit PGM (maxval 65535)");
  in.get();  // single whitespace byte after the header

  DepthImage img;
  img.width = width;
  img.height = height;
  img.depth_mm.resize(static_cast<std::size_t>(width) * height);
  for (float& d : img.depth_mm) {
    unsigned char bytes[2];
    in.read(reinterpret_cast<char*>(bytes), 2);
    if (!in) throw FormatError(pgm_path, 0, "truncated PGM payload");
    d = static_cast<float>((bytes[0] << 8) | bytes[1]);
  }

  std::ifstream side(depth_sidecar_path(pgm_path));
  if (!side) throw FileError("missing depth sidecar '" + depth_sidecar_path(pgm_path) + "'");
  nlohmann::json sidecar;
  try {
    side >> sidecar;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(depth_sidecar_path(pgm_path), 0, e.what());
  }
  try {
    const auto& pos = sidecar.at("pose").at("position_mm");
    const auto& dir = sidecar.at("pose").at("view_dir");
    const auto& up = sidecar.at("pose").at("up");
    img.pose = make_pose(Vec3(pos[0], pos[1], pos[2]), Vec3(dir[0], dir[1], dir[2]),
                         Vec3(up[0], up[1], up[2]));
    const auto& intr = sidecar.at("intrinsics");
    img.intrinsics.width_px = intr.at("width_px");
    img.intrinsics.height_px = intr.at("height_px");
    img.intrinsics.pixel_pitch_mm = intr.at("pixel_pitch_mm");
    img.intrinsics.principal_x_px = intr.at("principal_px")[0];
    img.intrinsics.principal_y_px = intr.at("principal_px")[1];
    img.focal_length_mm = sidecar.at("focal_length_mm");
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(depth_sidecar_path(pgm_path), 0, e.what());
  }
  if (img.intrinsics.width_px != width || img.intrinsics.height_px != height)
    throw FormatError(depth_sidecar_path(pgm_path), 0, "sidecar resolution disagrees with PGM");
  return img;
}

}  // namespace focusplan
