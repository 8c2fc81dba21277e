#include "xtalsst/volume_io.hpp"

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "xtalsst/errors.hpp"

namespace xtal {

namespace {

constexpr char kNpyMagic[] = "\x93NUMPY";

std::string npy_header(const std::vector<std::size_t>& shape) {
  std::ostringstream os;
  os << "{'descr': '<f8', 'fortran_order': False, 'shape': (";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    os << shape[i];
    if (shape.size() == 1 || i + 1 < shape.size()) os << ",";
    if (i + 1 < shape.size()) os << " ";
  }
  os << "), }";
  std::string dict = os.str();
  // Magic (8) + length field (2) + dict + padding + '\n', padded to 64 bytes.
  std::size_t raw = 10 + dict.size() + 1;
  std::size_t padded = (raw + 63) / 64 * 64;
  dict.append(padded - raw, ' ');
  dict.push_back('\n');
  return dict;
}

void npy_write(const std::filesystem::path& path, const std::vector<std::size_t>& shape,
               const double* data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open for writing: " + path.string());
  const std::string dict = npy_header(shape);
  const std::uint16_t len = static_cast<std::uint16_t>(dict.size());
  out.write(kNpyMagic, 6);
  out.put('\x01');
  out.put('\x00');
  out.write(reinterpret_cast<const char*>(&len), 2);
  out.write(dict.data(), static_cast<std::streamsize>(dict.size()));
  std::size_t count = 1;
  for (std::size_t d : shape) count *= d;
  out.write(reinterpret_cast<const char*>(data),
            static_cast<std::streamsize>(count * sizeof(double)));
  if (!out) throw FormatError("failed to write " + path.string());
}

// Pulls the value of a quoted or bare python-literal dict entry.
std::string dict_value(const std::string& dict, const std::string& key) {
  const std::string quoted = "'" + key + "'";
  std::size_t pos = dict.find(quoted);
  if (pos == std::string::npos) throw FormatError("npy header missing key " + key);
  pos = dict.find(':', pos);
  if (pos == std::string::npos) throw FormatError("npy header malformed at key " + key);
  ++pos;
  while (pos < dict.size() && dict[pos] == ' ') ++pos;
  std::size_t end = pos;
  if (pos < dict.size() && dict[pos] == '\'') {
    end = dict.find('\'', pos + 1);
    if (end == std::string::npos) throw FormatError("npy header unterminated string");
    return dict.substr(pos + 1, end - pos - 1);
  }
  if (pos < dict.size() && dict[pos] == '(') {
    end = dict.find(')', pos);
    if (end == std::string::npos) throw FormatError("npy header unterminated tuple");
    return dict.substr(pos, end - pos + 1);
  }
  while (end < dict.size() && dict[end] != ',' && dict[end] != '}') ++end;
  return dict.substr(pos, end - pos);
}

std::vector<std::size_t> parse_shape(const std::string& tuple) {
  std::vector<std::size_t> shape;
  std::size_t i = 0;
  while (i < tuple.size()) {
    if (std::isdigit(static_cast<unsigned char>(tuple[i]))) {
      std::size_t j = i;
      while (j < tuple.size() && std::isdigit(static_cast<unsigned char>(tuple[j]))) ++j;
      shape.push_back(std::stoull(tuple.substr(i, j - i)));
      i = j;
    } else {
      ++i;
    }
  }
  return shape;
}

struct NpyArray {
  std::vector<std::size_t> shape;
  std::vector<double> data;
};

NpyArray npy_read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open: " + path.string());
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kNpyMagic, 6) != 0)
    throw FormatError("not an npy file: " + path.string());
  if (magic[6] != 1 || magic[7] != 0)
    throw FormatError("unsupported npy version in " + path.string());
  std::uint16_t len = 0;
  in.read(reinterpret_cast<char*>(&len), 2);
  std::string dict(len, '\0');
  in.read(dict.data(), len);
  if (!in) throw FormatError("truncated npy header in " + path.string());

  const std::string descr = dict_value(dict, "descr");
  if (descr != "<f8" && descr != "<f4")
    throw FormatError("unsupported npy dtype '" + descr + "' in " + path.string());
  if (dict_value(dict, "fortran_order") != "False")
    throw FormatError("fortran-order npy not supported: " + path.string());

  NpyArray arr;
  arr.shape = parse_shape(dict_value(dict, "shape"));
  std::size_t count = 1;
  for (std::size_t d : arr.shape) count *= d;
  arr.data.resize(count);
  if (descr == "<f8") {
    in.read(reinterpret_cast<char*>(arr.data.data()),
            static_cast<std::streamsize>(count * sizeof(double)));
  } else {
    std::vector<float> tmp(count);
    in.read(reinterpret_cast<char*>(tmp.data()),
            static_cast<std::streamsize>(count * sizeof(float)));
    std::copy(tmp.begin(), tmp.end(), arr.data.begin());
  }
  if (!in) throw FormatError("payload shorter than header dims in " + path.string());
  return arr;
}

std::filesystem::path sidecar_path(const std::filesystem::path& raw) {
  std::filesystem::path p = raw;
  p.replace_extension(".meta.json");
  return p;
}

ScalarVolume load_f64raw(const std::filesystem::path& path) {
  std::ifstream meta(sidecar_path(path));
  if (!meta) throw FormatError("missing sidecar: " + sidecar_path(path).string());
  nlohmann::json j;
  try {
    meta >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("bad sidecar json: " + std::string(e.what()));
  }
  if (!j.contains("dims") || !j["dims"].is_array() || j["dims"].size() != 3)
    throw FormatError("sidecar dims must be a 3-element array");
  if (j.value("dtype", "") != "f64") throw FormatError("sidecar dtype must be f64");
  if (j.value("order", "") != "C") throw FormatError("sidecar order must be C");

  ScalarVolume vol;
  for (int i = 0; i < 3; ++i) {
    const auto d = j["dims"][i].get<std::int64_t>();
    if (d <= 0) throw FormatError("sidecar dims must be positive");
    vol.dims[i] = static_cast<int>(d);
  }
  const std::size_t count =
      static_cast<std::size_t>(vol.dims[0]) * vol.dims[1] * vol.dims[2];

  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open: " + path.string());
  vol.data.resize(count);
  in.read(reinterpret_cast<char*>(vol.data.data()),
          static_cast<std::streamsize>(count * sizeof(double)));
  if (!in || in.gcount() != static_cast<std::streamsize>(count * sizeof(double)))
    throw FormatError("payload size does not match sidecar dims: " + path.string());
  return vol;
}

void save_f64raw(const ScalarVolume& vol, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open for writing: " + path.string());
  out.write(reinterpret_cast<const char*>(vol.data.data()),
            static_cast<std::streamsize>(vol.data.size() * sizeof(double)));
  if (!out) throw FormatError("failed to write " + path.string());

  nlohmann::json j;
  j["dims"] = {vol.dims[0], vol.dims[1], vol.dims[2]};
  j["dtype"] = "f64";
  j["order"] = "C";
  std::ofstream meta(sidecar_path(path));
  if (!meta) throw FormatError("cannot write sidecar for " + path.string());
  meta << j.dump(2) << "\n";
}

}  // namespace

ScalarVolume load_volume(const std::filesystem::path& path) {
  const std::string ext = path.extension().string();
  ScalarVolume vol;
  if (ext == ".npy") {
    NpyArray arr = npy_read(path);
    if (arr.shape.size() != 3)
      throw FormatError("expected a 3D array in " + path.string());
    for (int i = 0; i < 3; ++i) vol.dims[i] = static_cast<int>(arr.shape[i]);
    vol.data = std::move(arr.data);
  } else if (ext == ".f64raw") {
    vol = load_f64raw(path);
  } else {
    throw FormatError("unsupported volume extension: " + path.string());
  }
  validate_volume(vol);
  return vol;
}

void save_volume(const ScalarVolume& vol, const std::filesystem::path& path) {
  validate_volume(vol);
  const std::string ext = path.extension().string();
  if (ext == ".npy") {
    npy_write(path,
              {static_cast<std::size_t>(vol.dims[0]), static_cast<std::size_t>(vol.dims[1]),
               static_cast<std::size_t>(vol.dims[2])},
              vol.data.data());
  } else if (ext == ".f64raw") {
    save_f64raw(vol, path);
  } else {
    throw FormatError("unsupported volume extension: " + path.string());
  }
}

std::vector<std::filesystem::path> export_field_slices(const ScalarVolume& field, int axis,
                                                       int stride,
                                                       const std::filesystem::path& out_dir) {
  validate_volume(field);
  if (axis < 1 || axis > 3) throw ValidationError("slice axis must be 1, 2, or 3");
  const int n = field.dims[axis - 1];
  if (stride < 1 || stride > n)
    throw ValidationError("slice stride must be in [1, axis dimension]");
  std::filesystem::create_directories(out_dir);

  // Remaining axes in canonical order form the slice rows/columns.
  const int a = axis - 1;
  const int r = (a == 0) ? 1 : 0;
  const int c = (a == 2) ? 1 : 2;

  std::vector<std::filesystem::path> paths;
  std::vector<double> plane(static_cast<std::size_t>(field.dims[r]) * field.dims[c]);
  for (int index = 0; index < n; index += stride) {
    for (int i = 0; i < field.dims[r]; ++i)
      for (int j = 0; j < field.dims[c]; ++j) {
        int idx[3];
        idx[a] = index;
        idx[r] = i;
        idx[c] = j;
        plane[static_cast<std::size_t>(i) * field.dims[c] + j] =
            field.at(idx[0], idx[1], idx[2]);
      }
    auto path = out_dir / ("slice_" + std::to_string(axis) + "_" + std::to_string(index) +
                           ".npy");
    npy_write(path,
              {static_cast<std::size_t>(field.dims[r]), static_cast<std::size_t>(field.dims[c])},
              plane.data());
    paths.push_back(std::move(path));
  }
  return paths;
}

}  // namespace xtal
