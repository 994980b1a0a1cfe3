#include "drrkit/metaimage.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "drrkit/error.hpp"

namespace drrkit {

static_assert(std::endian::native == std::endian::little, "raw I/O assumes a little-endian host");

namespace fs = std::filesystem;

namespace {

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

struct Header {
  std::map<std::string, std::string> fields;
  fs::path path;

  bool has(const std::string& key) const { return fields.count(key) != 0; }

  const std::string& get(const std::string& key) const {
    auto it = fields.find(key);
    if (it == fields.end()) throw Error(ErrorCode::MalformedHeader, key, "required key missing in " + path.string());
    return it->second;
  }

  template <class T>
  std::vector<T> numbers(const std::string& key) const {
    std::vector<T> out;
    std::istringstream in(get(key));
    std::string tok;
    while (in >> tok) {
      T value{};
      auto res = std::from_chars(tok.data(), tok.data() + tok.size(), value);
      if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size())
        throw Error(ErrorCode::MalformedHeader, key, "cannot parse '" + tok + "'");
      out.push_back(value);
    }
    return out;
  }
};

Header read_header(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MissingFile, path.string(), "cannot open header");
  Header h;
  h.path = path;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::MalformedHeader, trim(line), "expected 'Key = Value'");
    h.fields[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return h;
}

struct RawImage {
  std::vector<std::size_t> dims;  // fastest first
  std::vector<double> spacing;
  std::vector<double> offset;
  std::vector<double> values;
};

bool parse_bool(const Header& h, const std::string& key, bool fallback) {
  if (!h.has(key)) return fallback;
  const std::string& v = h.get(key);
  if (v == "True" || v == "true" || v == "1") return true;
  if (v == "False" || v == "false" || v == "0") return false;
  throw Error(ErrorCode::MalformedHeader, key, "expected True or False, got '" + v + "'");
}

RawImage read_image(const fs::path& header_path, std::size_t expected_ndims) {
  const Header h = read_header(header_path);
  if (h.has("ObjectType") && h.get("ObjectType") != "Image")
    throw Error(ErrorCode::MalformedHeader, "ObjectType", "expected Image");

  const auto ndims = h.numbers<std::size_t>("NDims");
  if (ndims.size() != 1 || ndims[0] != expected_ndims)
    throw Error(ErrorCode::MalformedHeader, "NDims", "expected " + std::to_string(expected_ndims));

  RawImage img;
  img.dims = h.numbers<std::size_t>("DimSize");
  if (img.dims.size() != expected_ndims) throw Error(ErrorCode::MalformedHeader, "DimSize", "wrong number of entries");
  if (std::any_of(img.dims.begin(), img.dims.end(), [](std::size_t d) { return d == 0; }))
    throw Error(ErrorCode::MalformedHeader, "DimSize", "zero extent");

  img.spacing.assign(expected_ndims, 1.0);
  if (h.has("ElementSpacing")) {
    img.spacing = h.numbers<double>("ElementSpacing");
    if (img.spacing.size() != expected_ndims)
      throw Error(ErrorCode::MalformedHeader, "ElementSpacing", "wrong number of entries");
  }
  img.offset.assign(expected_ndims, 0.0);
  for (const char* key : {"Offset", "Origin", "Position"}) {
    if (!h.has(key)) continue;
    img.offset = h.numbers<double>(key);
    if (img.offset.size() != expected_ndims) throw Error(ErrorCode::MalformedHeader, key, "wrong number of entries");
    break;
  }

  if (parse_bool(h, "CompressedData", false))
    throw Error(ErrorCode::UnsupportedElementType, "CompressedData", "compressed raw data is not supported");
  const bool msb = parse_bool(h, "ElementByteOrderMSB", parse_bool(h, "BinaryDataByteOrderMSB", false));

  const std::string& type = h.get("ElementType");
  std::size_t elem_size = 0;
  if (type == "MET_SHORT") elem_size = 2;
  else if (type == "MET_FLOAT") elem_size = 4;
  else throw Error(ErrorCode::UnsupportedElementType, "ElementType", type);

  const std::string& data_file = h.get("ElementDataFile");
  if (data_file == "LOCAL" || data_file == "LIST" || data_file.find('%') != std::string::npos)
    throw Error(ErrorCode::MalformedHeader, "ElementDataFile", "only a single external raw file is supported");
  const fs::path raw_path = header_path.parent_path() / data_file;

  std::size_t count = 1;
  for (auto d : img.dims) count *= d;

  std::ifstream raw(raw_path, std::ios::binary);
  if (!raw) throw Error(ErrorCode::MissingFile, "ElementDataFile", "cannot open " + raw_path.string());
  std::vector<char> bytes((std::istreambuf_iterator<char>(raw)), std::istreambuf_iterator<char>());
  if (bytes.size() != count * elem_size)
    throw Error(ErrorCode::DataSizeMismatch, "ElementDataFile",
                raw_path.string() + " holds " + std::to_string(bytes.size()) + " bytes, header implies " +
                    std::to_string(count * elem_size));
  if (msb) {
    for (std::size_t i = 0; i < count; ++i) std::reverse(bytes.begin() + i * elem_size, bytes.begin() + (i + 1) * elem_size);
  }

  img.values.resize(count);
  if (elem_size == 2) {
    for (std::size_t i = 0; i < count; ++i) {
      std::int16_t s;
      std::memcpy(&s, bytes.data() + 2 * i, 2);
      img.values[i] = s;
    }
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      float f;
      std::memcpy(&f, bytes.data() + 4 * i, 4);
      img.values[i] = f;
    }
  }
  return img;
}

void write_image(const fs::path& header_path, const std::vector<std::size_t>& dims, const std::vector<double>& spacing,
                 const std::vector<double>& offset, std::span<const double> values, ElementType type) {
  if (header_path.extension() != ".mhd")
    throw Error(ErrorCode::InvalidArgument, header_path.string(), "MetaImage header must end in .mhd");
  fs::path raw_path = header_path;
  raw_path.replace_extension(".raw");

  auto join = [](const auto& xs, auto fmt) {
    std::string s;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (i) s += ' ';
      s += fmt(xs[i]);
    }
    return s;
  };

  std::ofstream hdr(header_path, std::ios::trunc);
  if (!hdr) throw Error(ErrorCode::IoFailure, header_path.string(), "cannot open for writing");
  hdr << "ObjectType = Image\n"
      << "NDims = " << dims.size() << "\n"
      << "DimSize = " << join(dims, [](std::size_t d) { return std::to_string(d); }) << "\n"
      << "ElementSpacing = " << join(spacing, format_double) << "\n"
      << "Offset = " << join(offset, format_double) << "\n"
      << "ElementType = " << (type == ElementType::Short ? "MET_SHORT" : "MET_FLOAT") << "\n"
      << "ElementByteOrderMSB = False\n"
      << "ElementDataFile = " << raw_path.filename().string() << "\n";
  if (!hdr) throw Error(ErrorCode::IoFailure, header_path.string(), "write failed");

  std::vector<char> bytes;
  if (type == ElementType::Short) {
    bytes.resize(values.size() * 2);
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double r = std::clamp(std::round(values[i]), -32768.0, 32767.0);
      const auto s = static_cast<std::int16_t>(r);
      std::memcpy(bytes.data() + 2 * i, &s, 2);
    }
  } else {
    bytes.resize(values.size() * 4);
    for (std::size_t i = 0; i < values.size(); ++i) {
      const auto f = static_cast<float>(values[i]);
      std::memcpy(bytes.data() + 4 * i, &f, 4);
    }
  }
  std::ofstream raw(raw_path, std::ios::binary | std::ios::trunc);
  if (!raw) throw Error(ErrorCode::IoFailure, raw_path.string(), "cannot open for writing");
  raw.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!raw) throw Error(ErrorCode::IoFailure, raw_path.string(), "write failed");
}

GridGeometry geometry_from(const RawImage& img) {
  GridGeometry g;
  g.dims = {img.dims[2], img.dims[1], img.dims[0]};
  g.spacing = {img.spacing[0], img.spacing[1], img.spacing[2]};
  g.origin = {img.offset[0], img.offset[1], img.offset[2]};
  try {
    g.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::MalformedHeader, "ElementSpacing", e.what());
  }
  return g;
}

}  // namespace

Volume load_volume(const fs::path& header) {
  RawImage img = read_image(header, 3);
  return Volume(geometry_from(img), std::move(img.values));
}

void save_volume(const Volume& v, const fs::path& header, ElementType type) {
  const GridGeometry& g = v.geometry();
  write_image(header, {g.dims.width, g.dims.height, g.dims.depth}, {g.spacing.x, g.spacing.y, g.spacing.z},
              {g.origin.x, g.origin.y, g.origin.z}, v.data(), type);
}

Mask load_mask(const fs::path& header) {
  const RawImage img = read_image(header, 3);
  std::vector<std::uint8_t> bits(img.values.size());
  for (std::size_t i = 0; i < bits.size(); ++i) bits[i] = img.values[i] != 0.0 ? 1 : 0;
  return Mask(geometry_from(img), std::move(bits));
}

void save_mask(const Mask& m, const fs::path& header) {
  const GridGeometry& g = m.geometry();
  std::vector<double> values(m.data().begin(), m.data().end());
  write_image(header, {g.dims.width, g.dims.height, g.dims.depth}, {g.spacing.x, g.spacing.y, g.spacing.z},
              {g.origin.x, g.origin.y, g.origin.z}, values, ElementType::Short);
}

ImageGrid2D load_image2d(const fs::path& header) {
  const RawImage img = read_image(header, 2);
  ImageGrid2D out(img.dims[1], img.dims[0], img.spacing[1], img.spacing[0]);
  std::copy(img.values.begin(), img.values.end(), out.data().begin());
  return out;
}

void save_image2d(const ImageGrid2D& img, const fs::path& header) {
  const double half_w = 0.5 * static_cast<double>(img.cols() - 1) * img.col_spacing();
  const double half_h = 0.5 * static_cast<double>(img.rows() - 1) * img.row_spacing();
  write_image(header, {img.cols(), img.rows()}, {img.col_spacing(), img.row_spacing()}, {-half_w, -half_h},
              img.data(), ElementType::Float);
}

void save_pgm16(const ImageGrid2D& img, const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, path.string(), "cannot open for writing");
  out << "P5\n" << img.cols() << ' ' << img.rows() << "\n65535\n";
  std::vector<unsigned char> bytes(img.size() * 2);
  for (std::size_t i = 0; i < img.size(); ++i) {
    const double v = std::clamp(img[i], 0.0, 1.0);
    const auto s = static_cast<std::uint16_t>(std::lround(v * 65535.0));
    bytes[2 * i] = static_cast<unsigned char>(s >> 8);
    bytes[2 * i + 1] = static_cast<unsigned char>(s & 0xff);
  }
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::IoFailure, path.string(), "write failed");
}

}  // namespace drrkit
