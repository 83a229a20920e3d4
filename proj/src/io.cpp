#include "tecromac/io.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <vector>

namespace tecromac {

namespace fs = std::filesystem;

namespace {

struct Frame {
  Index rows = 0;
  Index cols = 0;
  int channels = 1;
  int maxval = 255;
  std::vector<std::uint16_t> codes;  // row-major, channel-interleaved
};

bool is_frame_file(const fs::path &p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char ch) { return std::tolower(ch); });
  return ext == ".pgm" || ext == ".ppm" || ext == ".pnm";
}

std::vector<fs::path> list_frames(const fs::path &dir) {
  if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto &entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && is_frame_file(entry.path())) files.push_back(entry.path());
  if (files.empty()) throw IoError("no frame files in " + dir.string());
  std::sort(files.begin(), files.end(),
            [](const fs::path &a, const fs::path &b) { return a.filename().string() < b.filename().string(); });
  return files;
}

// Reads the next header token, skipping whitespace and '#' comments.
long read_header_int(std::istream &in, const fs::path &path) {
  for (;;) {
    const int ch = in.peek();
    if (ch == EOF) throw FormatError("truncated netpbm header in " + path.string());
    if (std::isspace(ch)) {
      in.get();
    } else if (ch == '#') {
      std::string comment;
      std::getline(in, comment);
    } else {
      break;
    }
  }
  long value = -1;
  if (!(in >> value) || value < 0) throw FormatError("malformed netpbm header in " + path.string());
  return value;
}

Frame read_pnm(const fs::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  char magic[2] = {0, 0};
  in.read(magic, 2);
  Frame f;
  if (magic[0] == 'P' && magic[1] == '5')
    f.channels = 1;
  else if (magic[0] == 'P' && magic[1] == '6')
    f.channels = 3;
  else
    throw FormatError("unsupported image format (expected binary PGM/PPM): " + path.string());
  f.cols = read_header_int(in, path);
  f.rows = read_header_int(in, path);
  f.maxval = static_cast<int>(read_header_int(in, path));
  if (f.cols <= 0 || f.rows <= 0 || f.maxval <= 0 || f.maxval > 65535)
    throw FormatError("invalid netpbm header values in " + path.string());
  in.get();  // single whitespace before the raster

  const std::size_t count = static_cast<std::size_t>(f.rows * f.cols * f.channels);
  const std::size_t width = f.maxval > 255 ? 2 : 1;
  std::vector<unsigned char> raw(count * width);
  in.read(reinterpret_cast<char *>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (static_cast<std::size_t>(in.gcount()) != raw.size()) throw FormatError("truncated raster in " + path.string());
  f.codes.resize(count);
  for (std::size_t s = 0; s < count; ++s)
    f.codes[s] = width == 2 ? static_cast<std::uint16_t>((raw[2 * s] << 8) | raw[2 * s + 1]) : raw[s];
  return f;
}

void write_pnm(const fs::path &path, const Frame &f) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << (f.channels == 1 ? "P5" : "P6") << '\n' << f.cols << ' ' << f.rows << '\n' << f.maxval << '\n';
  const bool wide = f.maxval > 255;
  std::vector<unsigned char> raw;
  raw.reserve(f.codes.size() * (wide ? 2 : 1));
  for (std::uint16_t code : f.codes) {
    if (wide) raw.push_back(static_cast<unsigned char>(code >> 8));
    raw.push_back(static_cast<unsigned char>(code & 0xff));
  }
  out.write(reinterpret_cast<const char *>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

std::string frame_name(const std::string &prefix, Index index, int digits, const char *ext) {
  std::ostringstream name;
  name << prefix << std::setw(digits) << std::setfill('0') << index << ext;
  return name.str();
}

int frame_digits(int requested, Index frames) {
  return std::max(requested, static_cast<int>(std::to_string(frames - 1).size()));
}

void ensure_directory(const fs::path &dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (!fs::is_directory(dir)) throw IoError("cannot create directory " + dir.string());
}

template <typename T>
void put_le(std::ostream &out, T value) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  out.write(reinterpret_cast<const char *>(bytes), sizeof(T));
}

template <typename T>
T get_le(const unsigned char *bytes) {
  unsigned char copy[sizeof(T)];
  std::memcpy(copy, bytes, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(copy, copy + sizeof(T));
  T value;
  std::memcpy(&value, copy, sizeof(T));
  return value;
}

}  // namespace

ImageSequence load_frames(const FrameDirSpec &spec) {
  const std::vector<fs::path> files = list_frames(spec.path);
  const Frame first = read_pnm(files.front());
  const Dims d{first.rows, first.cols, first.channels, static_cast<Index>(files.size())};
  ImageSequence seq(d);
  for (Index l = 0; l < d.t; ++l) {
    const Frame f = l == 0 ? first : read_pnm(files[static_cast<std::size_t>(l)]);
    if (f.rows != d.m || f.cols != d.n || f.channels != d.c)
      throw FormatError("frame " + files[static_cast<std::size_t>(l)].string() + " differs in shape from the first frame");
    const double scale = 1.0 / static_cast<double>(f.maxval);
    for (Index i = 0; i < d.m; ++i)
      for (Index j = 0; j < d.n; ++j)
        for (Index k = 0; k < d.c; ++k)
          seq(i, j, k, l) = static_cast<double>(f.codes[static_cast<std::size_t>((i * d.n + j) * d.c + k)]) * scale;
  }
  return seq;
}

void save_frames(const ImageSequence &seq, const FrameDirSpec &spec) {
  const Dims &d = seq.dims();
  if (spec.channels != 1 && spec.channels != 3) throw std::invalid_argument("frames must have 1 or 3 channels");
  if (spec.bit_depth != 8 && spec.bit_depth != 16) throw std::invalid_argument("bit depth must be 8 or 16");
  if (d.c != spec.channels)
    throw DimensionError("sequence has " + std::to_string(d.c) + " channels, frame spec expects " +
                         std::to_string(spec.channels));
  ensure_directory(spec.path);
  const int digits = frame_digits(spec.digits, d.t);
  const char *ext = d.c == 1 ? ".pgm" : ".ppm";
  Frame f;
  f.rows = d.m;
  f.cols = d.n;
  f.channels = static_cast<int>(d.c);
  f.maxval = (1 << spec.bit_depth) - 1;
  f.codes.resize(static_cast<std::size_t>(d.m * d.n * d.c));
  for (Index l = 0; l < d.t; ++l) {
    for (Index i = 0; i < d.m; ++i)
      for (Index j = 0; j < d.n; ++j)
        for (Index k = 0; k < d.c; ++k) {
          const double v = std::clamp(seq(i, j, k, l), 0.0, 1.0);
          f.codes[static_cast<std::size_t>((i * d.n + j) * d.c + k)] =
              static_cast<std::uint16_t>(std::lround(v * f.maxval));
        }
    write_pnm(spec.path / frame_name(spec.prefix, l, digits, ext), f);
  }
}

void save_raw(const ImageSequence &seq, const fs::path &path, RawElement element) {
  const Dims &d = seq.dims();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(kRawMagic.data(), kRawMagic.size());
  out.put(static_cast<char>(kRawVersion));
  for (Index extent : {d.m, d.n, d.c, d.t}) put_le(out, static_cast<std::uint32_t>(extent));
  out.put(static_cast<char>(element));
  for (double v : seq.data()) {
    if (element == RawElement::f64)
      put_le(out, v);
    else
      put_le(out, static_cast<float>(v));
  }
  if (!out) throw IoError("failed writing " + path.string());
}

ImageSequence load_raw(const fs::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() < kRawHeaderSize) throw FormatError("truncated raw tensor header: " + path.string());
  if (std::memcmp(bytes.data(), kRawMagic.data(), kRawMagic.size()) != 0)
    throw FormatError("bad magic in raw tensor file: " + path.string());
  if (bytes[4] != kRawVersion) throw FormatError("unknown raw tensor version " + std::to_string(bytes[4]));
  Dims d;
  d.m = get_le<std::uint32_t>(&bytes[5]);
  d.n = get_le<std::uint32_t>(&bytes[9]);
  d.c = get_le<std::uint32_t>(&bytes[13]);
  d.t = get_le<std::uint32_t>(&bytes[17]);
  if (!d.valid()) throw FormatError("raw tensor has a zero dimension: " + path.string());
  const auto element = static_cast<RawElement>(bytes[21]);
  std::size_t width = 0;
  if (element == RawElement::f64)
    width = 8;
  else if (element == RawElement::f32)
    width = 4;
  else
    throw FormatError("unknown raw element type " + std::to_string(bytes[21]));
  const std::size_t count = static_cast<std::size_t>(d.size());
  if (bytes.size() != kRawHeaderSize + count * width)
    throw FormatError("raw tensor payload length does not match its header: " + path.string());

  std::vector<double> data(count);
  const unsigned char *payload = bytes.data() + kRawHeaderSize;
  for (std::size_t s = 0; s < count; ++s)
    data[s] = width == 8 ? get_le<double>(payload + 8 * s) : static_cast<double>(get_le<float>(payload + 4 * s));
  return ImageSequence(d, std::move(data));
}

void save_mask(const ObservationMask &mask, const fs::path &dir, const std::string &prefix) {
  ensure_directory(dir);
  const int digits = frame_digits(4, mask.t());
  Frame f;
  f.rows = mask.m();
  f.cols = mask.n();
  f.channels = 1;
  f.maxval = 255;
  f.codes.resize(static_cast<std::size_t>(mask.m() * mask.n()));
  for (Index l = 0; l < mask.t(); ++l) {
    for (Index i = 0; i < mask.m(); ++i)
      for (Index j = 0; j < mask.n(); ++j)
        f.codes[static_cast<std::size_t>(i * mask.n() + j)] = mask(i, j, l) ? 255 : 0;
    write_pnm(dir / frame_name(prefix, l, digits, ".pgm"), f);
  }
}

ObservationMask load_mask(const fs::path &dir) {
  const std::vector<fs::path> files = list_frames(dir);
  ObservationMask mask;
  for (std::size_t l = 0; l < files.size(); ++l) {
    const Frame f = read_pnm(files[l]);
    if (f.channels != 1) throw FormatError("mask frames must be single-channel: " + files[l].string());
    if (l == 0) mask = ObservationMask(f.rows, f.cols, static_cast<Index>(files.size()), false);
    if (f.rows != mask.m() || f.cols != mask.n()) throw FormatError("mask frames differ in shape");
    for (Index i = 0; i < f.rows; ++i)
      for (Index j = 0; j < f.cols; ++j)
        mask.set(i, j, static_cast<Index>(l), f.codes[static_cast<std::size_t>(i * f.cols + j)] != 0);
  }
  return mask;
}

ObservationMask load_mask(const fs::path &dir, const Dims &expected) {
  ObservationMask mask = load_mask(dir);
  if (!mask.matches(expected)) throw DimensionError("mask shape does not match the sequence");
  return mask;
}

ImageSequence load_sequence(const fs::path &path) {
  if (fs::is_directory(path)) return load_frames(FrameDirSpec{path});
  return load_raw(path);
}

}  // namespace tecromac
