#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>
#include <string>

#include "cvpyr/error.hpp"
#include "cvpyr/point_cloud.hpp"

namespace cvpyr {
namespace {

struct Property {
  std::string name;
  std::string type;
  std::size_t offset = 0;
};

std::size_t type_size(const std::string& type) {
  static const std::map<std::string, std::size_t> sizes = {
      {"char", 1},   {"int8", 1},    {"uchar", 1},  {"uint8", 1},   {"short", 2},
      {"int16", 2},  {"ushort", 2},  {"uint16", 2}, {"int", 4},     {"int32", 4},
      {"uint", 4},   {"uint32", 4},  {"float", 4},  {"float32", 4}, {"double", 8},
      {"float64", 8}};
  const auto it = sizes.find(type);
  if (it == sizes.end()) throw InputError("PLY: unsupported property type '" + type + "'");
  return it->second;
}

template <typename T>
T load(const unsigned char* p) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  return v;
}

double decode(const unsigned char* p, const std::string& type) {
  static_assert(std::endian::native == std::endian::little, "big-endian hosts are not supported");
  if (type == "char" || type == "int8") return load<std::int8_t>(p);
  if (type == "uchar" || type == "uint8") return load<std::uint8_t>(p);
  if (type == "short" || type == "int16") return load<std::int16_t>(p);
  if (type == "ushort" || type == "uint16") return load<std::uint16_t>(p);
  if (type == "int" || type == "int32") return load<std::int32_t>(p);
  if (type == "uint" || type == "uint32") return load<std::uint32_t>(p);
  if (type == "float" || type == "float32") return load<float>(p);
  return load<double>(p);
}

}  // namespace

std::vector<Eigen::Vector3d> PointCloud::positions() const {
  std::vector<Eigen::Vector3d> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(p.position);
  return out;
}

void write_ply(const std::filesystem::path& path, const PointCloud& cloud) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << "ply\nformat binary_little_endian 1.0\n"
      << "element vertex " << cloud.size() << '\n'
      << "property float x\nproperty float y\nproperty float z\n"
      << "property uchar red\nproperty uchar green\nproperty uchar blue\n"
      << "end_header\n";
  std::vector<unsigned char> buf(cloud.size() * 15);
  unsigned char* p = buf.data();
  for (const auto& pt : cloud.points) {
    for (int k = 0; k < 3; ++k) {
      const float v = static_cast<float>(pt.position[k]);
      std::memcpy(p, &v, 4);
      p += 4;
    }
    for (int k = 0; k < 3; ++k) *p++ = pt.color[k];
  }
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!out) throw InputError("failed writing " + path.string());
}

PointCloud read_ply(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind("ply", 0) != 0) throw InputError(path.string() + ": not a PLY file");

  bool binary = false;
  std::size_t vertex_count = 0;
  bool vertex_seen = false;
  int elements = 0;
  std::string current;
  std::vector<Property> props;
  std::size_t stride = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string kw;
    ls >> kw;
    if (kw == "format") {
      std::string fmt;
      ls >> fmt;
      if (fmt == "binary_little_endian") {
        binary = true;
      } else if (fmt == "ascii") {
        binary = false;
      } else {
        throw InputError(path.string() + ": unsupported PLY format '" + fmt + "'");
      }
    } else if (kw == "element") {
      std::size_t n = 0;
      ls >> current >> n;
      if (current == "vertex") {
        // Payload offsets assume the vertex block comes first.
        if (vertex_seen || elements > 0) throw InputError(path.string() + ": vertex must be the first element");
        vertex_seen = true;
        vertex_count = n;
      }
      ++elements;
    } else if (kw == "property" && current == "vertex") {
      std::string type;
      std::string name;
      ls >> type;
      if (type == "list") throw InputError(path.string() + ": list properties in vertex element");
      ls >> name;
      props.push_back({name, type, stride});
      stride += type_size(type);
    } else if (kw == "end_header") {
      break;
    }
  }
  if (!vertex_seen) throw InputError(path.string() + ": no vertex element");

  std::map<std::string, const Property*> by_name;
  for (const auto& p : props) by_name[p.name] = &p;
  for (const char* req : {"x", "y", "z"}) {
    if (!by_name.count(req)) throw InputError(path.string() + ": missing property " + req);
  }

  PointCloud cloud;
  cloud.points.resize(vertex_count);
  if (binary) {
    std::vector<unsigned char> buf(vertex_count * stride);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (static_cast<std::size_t>(in.gcount()) != buf.size()) throw InputError(path.string() + ": truncated payload");
    for (std::size_t i = 0; i < vertex_count; ++i) {
      const unsigned char* row = buf.data() + i * stride;
      auto& pt = cloud.points[i];
      pt.position = {decode(row + by_name["x"]->offset, by_name["x"]->type),
                     decode(row + by_name["y"]->offset, by_name["y"]->type),
                     decode(row + by_name["z"]->offset, by_name["z"]->type)};
      const char* channels[3] = {"red", "green", "blue"};
      for (int k = 0; k < 3; ++k) {
        if (auto it = by_name.find(channels[k]); it != by_name.end()) {
          pt.color[k] = static_cast<std::uint8_t>(decode(row + it->second->offset, it->second->type));
        }
      }
    }
  } else {
    for (std::size_t i = 0; i < vertex_count; ++i) {
      std::vector<double> values(props.size());
      for (auto& v : values) {
        if (!(in >> v)) throw InputError(path.string() + ": truncated ASCII payload");
      }
      auto& pt = cloud.points[i];
      for (std::size_t k = 0; k < props.size(); ++k) {
        const auto& name = props[k].name;
        if (name == "x") pt.position.x() = values[k];
        if (name == "y") pt.position.y() = values[k];
        if (name == "z") pt.position.z() = values[k];
        if (name == "red") pt.color[0] = static_cast<std::uint8_t>(values[k]);
        if (name == "green") pt.color[1] = static_cast<std::uint8_t>(values[k]);
        if (name == "blue") pt.color[2] = static_cast<std::uint8_t>(values[k]);
      }
    }
  }
  return cloud;
}

}  // namespace cvpyr
