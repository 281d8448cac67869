#include <png.h>

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "cvpyr/error.hpp"
#include "cvpyr/io.hpp"

namespace cvpyr {
namespace {

std::vector<unsigned char> slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Minimal header tokenizer shared by PFM and PNM: whitespace-separated tokens,
// '#' comments to end of line.
class HeaderReader {
 public:
  HeaderReader(const std::vector<unsigned char>& bytes, const fs::path& path)
      : bytes_(bytes), path_(path) {}

  std::string token() {
    skip_space_and_comments();
    std::string out;
    while (pos_ < bytes_.size() && !std::isspace(bytes_[pos_])) out.push_back(char(bytes_[pos_++]));
    if (out.empty()) fail("unexpected end of header");
    return out;
  }

  // The header ends with exactly one whitespace byte before the payload.
  std::size_t payload_offset() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) fail("missing header terminator");
    return pos_ + 1;
  }

  int positive_int() {
    const std::string t = token();
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(t, &used);
    } catch (const std::exception&) {
      fail("bad integer '" + t + "'");
    }
    if (used != t.size() || v <= 0) fail("bad dimension '" + t + "'");
    return v;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw InputError(path_.string() + ": malformed header: " + what);
  }

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  const std::vector<unsigned char>& bytes_;
  const fs::path& path_;
  std::size_t pos_ = 0;
};

std::string lower_ext(const fs::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

}  // namespace

Image read_pfm(const fs::path& path) {
  const auto bytes = slurp(path);
  HeaderReader header(bytes, path);
  const std::string magic = header.token();
  int channels = 0;
  if (magic == "Pf") {
    channels = 1;
  } else if (magic == "PF") {
    channels = 3;
  } else {
    header.fail("magic must be 'Pf' or 'PF', got '" + magic + "'");
  }
  const int width = header.positive_int();
  const int height = header.positive_int();
  const std::string scale_tok = header.token();
  double scale = 0.0;
  try {
    scale = std::stod(scale_tok);
  } catch (const std::exception&) {
    header.fail("bad scale '" + scale_tok + "'");
  }
  if (scale == 0.0 || !std::isfinite(scale)) header.fail("scale must be finite and non-zero");
  const bool little = scale < 0.0;
  const std::size_t offset = header.payload_offset();

  const std::size_t count = static_cast<std::size_t>(width) * height * channels;
  if (bytes.size() - offset < count * 4) {
    throw InputError(path.string() + ": truncated payload (" +
                     std::to_string((bytes.size() - offset) / 4) + " of " +
                     std::to_string(count) + " floats)");
  }

  Image img(width, height, channels);
  const bool host_little = std::endian::native == std::endian::little;
  for (int row = 0; row < height; ++row) {
    // PFM stores the bottom row first.
    const std::size_t src_row = static_cast<std::size_t>(height - 1 - row);
    for (int i = 0; i < width * channels; ++i) {
      const unsigned char* p = bytes.data() + offset + (src_row * width * channels + i) * 4;
      std::uint32_t bits = 0;
      std::memcpy(&bits, p, 4);
      if (little != host_little) bits = __builtin_bswap32(bits);
      const float v = std::bit_cast<float>(bits);
      if (!std::isfinite(v)) throw InputError(path.string() + ": non-finite sample in payload");
      img.data[static_cast<std::size_t>(row) * width * channels + i] = v;
    }
  }
  return img;
}

void write_pfm(const fs::path& path, const Image& img) {
  img.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << (img.channels == 3 ? "PF" : "Pf") << '\n'
      << img.width << ' ' << img.height << '\n'
      << "-1.0\n";
  const bool host_little = std::endian::native == std::endian::little;
  const std::size_t row_len = static_cast<std::size_t>(img.width) * img.channels;
  std::vector<unsigned char> row(row_len * 4);
  for (int r = img.height - 1; r >= 0; --r) {
    for (std::size_t i = 0; i < row_len; ++i) {
      auto bits = std::bit_cast<std::uint32_t>(img.data[r * row_len + i]);
      if (!host_little) bits = __builtin_bswap32(bits);
      std::memcpy(row.data() + i * 4, &bits, 4);
    }
    out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
  }
  if (!out) throw InputError("failed writing " + path.string());
}

Image read_pnm(const fs::path& path) {
  const auto bytes = slurp(path);
  HeaderReader header(bytes, path);
  const std::string magic = header.token();
  int channels = 0;
  if (magic == "P5") {
    channels = 1;
  } else if (magic == "P6") {
    channels = 3;
  } else {
    header.fail("only binary P5/P6 supported, got '" + magic + "'");
  }
  const int width = header.positive_int();
  const int height = header.positive_int();
  const int maxval = header.positive_int();
  if (maxval > 255) header.fail("only 8-bit PNM supported");
  const std::size_t offset = header.payload_offset();
  const std::size_t count = static_cast<std::size_t>(width) * height * channels;
  if (bytes.size() - offset < count) throw InputError(path.string() + ": truncated payload");
  Image img(width, height, channels);
  for (std::size_t i = 0; i < count; ++i) {
    img.data[i] = std::min(1.0f, static_cast<float>(bytes[offset + i]) / static_cast<float>(maxval));
  }
  return img;
}

void write_pnm(const fs::path& path, const Image& img) {
  img.validate_photometric();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << (img.channels == 3 ? "P6" : "P5") << '\n' << img.width << ' ' << img.height << "\n255\n";
  std::vector<unsigned char> buf(img.data.size());
  for (std::size_t i = 0; i < buf.size(); ++i) {
    buf[i] = static_cast<unsigned char>(std::lround(img.data[i] * 255.0f));
  }
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!out) throw InputError("failed writing " + path.string());
}

Image read_png(const fs::path& path) {
  png_image png;
  std::memset(&png, 0, sizeof(png));
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&png, path.string().c_str())) {
    throw InputError(path.string() + ": " + png.message);
  }
  const bool color = (png.format & PNG_FORMAT_FLAG_COLOR) != 0;
  png.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  std::vector<unsigned char> buf(PNG_IMAGE_SIZE(png));
  if (!png_image_finish_read(&png, nullptr, buf.data(), 0, nullptr)) {
    const std::string msg = png.message;
    png_image_free(&png);
    throw InputError(path.string() + ": " + msg);
  }
  Image img(static_cast<int>(png.width), static_cast<int>(png.height), color ? 3 : 1);
  for (std::size_t i = 0; i < img.data.size(); ++i) img.data[i] = buf[i] / 255.0f;
  return img;
}

void write_png(const fs::path& path, const Image& img) {
  img.validate_photometric();
  png_image png;
  std::memset(&png, 0, sizeof(png));
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(img.width);
  png.height = static_cast<png_uint_32>(img.height);
  png.format = img.channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  std::vector<unsigned char> buf(img.data.size());
  for (std::size_t i = 0; i < buf.size(); ++i) {
    buf[i] = static_cast<unsigned char>(std::lround(img.data[i] * 255.0f));
  }
  if (!png_image_write_to_file(&png, path.string().c_str(), 0, buf.data(), 0, nullptr)) {
    throw InputError(path.string() + ": " + png.message);
  }
}

Image read_image(const fs::path& path) {
  const std::string ext = lower_ext(path);
  if (ext == ".pfm") return read_pfm(path);
  if (ext == ".pgm" || ext == ".ppm" || ext == ".pnm") return read_pnm(path);
  if (ext == ".png") return read_png(path);
  throw InputError("unsupported image format: " + path.string());
}

}  // namespace cvpyr
