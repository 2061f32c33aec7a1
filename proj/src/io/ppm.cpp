#include "mmvs/io/ppm.hpp"

#include <cctype>
#include <fstream>
#include <stdexcept>
#include <string>

namespace mmvs::io {

namespace {

// Reads the next whitespace-delimited header token, skipping '#' comments.
std::string next_token(std::istream& in) {
  std::string tok;
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    } else if (std::isspace(c)) {
      if (!tok.empty()) break;
    } else {
      tok.push_back(static_cast<char>(c));
    }
    c = in.get();
  }
  return tok;
}

}  // namespace

void write_ppm(const std::filesystem::path& path, const Rgb8Image& image) {
  if (image.data.size() != image.width * image.height * 3) {
    throw std::invalid_argument("PPM raster size does not match its dimensions");
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "P6\n" << image.width << ' ' << image.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.data.data()),
            static_cast<std::streamsize>(image.data.size()));
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

Rgb8Image read_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  if (next_token(in) != "P6") throw std::runtime_error(path.string() + ": not a binary PPM");
  Rgb8Image img;
  try {
    img.width = std::stoul(next_token(in));
    img.height = std::stoul(next_token(in));
    if (std::stoul(next_token(in)) != 255) {
      throw std::runtime_error(path.string() + ": only maxval 255 is supported");
    }
  } catch (const std::logic_error&) {
    throw std::runtime_error(path.string() + ": malformed PPM header");
  }
  img.data.resize(img.width * img.height * 3);
  in.read(reinterpret_cast<char*>(img.data.data()), static_cast<std::streamsize>(img.data.size()));
  if (static_cast<std::size_t>(in.gcount()) != img.data.size()) {
    throw std::runtime_error(path.string() + ": truncated PPM raster");
  }
  return img;
}

}  // namespace mmvs::io
