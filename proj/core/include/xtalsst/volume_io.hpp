#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "xtalsst/volume.hpp"

namespace xtal {

// Supported on-disk forms:
//   *.npy     NPY v1.0, C order, 3D, dtype <f8 (or <f4, widened on load)
//   *.f64raw  raw little-endian f64 payload + "<stem>.meta.json" sidecar
// Round trips through save_volume/load_volume are bit exact for f64.
ScalarVolume load_volume(const std::filesystem::path& path);
void save_volume(const ScalarVolume& vol, const std::filesystem::path& path);

// Writes one 2D .npy per exported plane, planes {0, stride, 2*stride, ...}
// along `axis` (1-based), named slice_<axis>_<index>.npy. Returns the paths
// in index order.
std::vector<std::filesystem::path> export_field_slices(const ScalarVolume& field,
                                                       int axis, int stride,
                                                       const std::filesystem::path& out_dir);

}  // namespace xtal
