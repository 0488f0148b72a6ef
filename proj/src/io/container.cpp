#include "hspn/io/container.hpp"

#include <cstring>
#include <fstream>

namespace hspn::io {

namespace {

size_t dtype_size(DType t) {
  switch (t) {
    case DType::f64: return 8;
    case DType::f32: return 4;
    case DType::i64: return 8;
    case DType::u8: return 1;
  }
  return 0;
}

template <typename T>
void append(std::vector<unsigned char>& out, const T& v) {
  const auto* p = reinterpret_cast<const unsigned char*>(&v);
  out.insert(out.end(), p, p + sizeof(T));
}

}  // namespace

std::vector<std::string> Container::names() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : entries_) out.push_back(k);
  return out;
}

void Container::put_f64(const std::string& name, const double* data,
                        std::vector<uint64_t> dims) {
  Array a;
  a.dtype = DType::f64;
  a.dims = std::move(dims);
  a.raw.resize(a.count() * 8);
  std::memcpy(a.raw.data(), data, a.raw.size());
  entries_[name] = std::move(a);
}

void Container::put_f32(const std::string& name, const float* data,
                        std::vector<uint64_t> dims) {
  Array a;
  a.dtype = DType::f32;
  a.dims = std::move(dims);
  a.raw.resize(a.count() * 4);
  std::memcpy(a.raw.data(), data, a.raw.size());
  entries_[name] = std::move(a);
}

void Container::put_f32_from_f64(const std::string& name, const double* data,
                                 std::vector<uint64_t> dims) {
  Array a;
  a.dtype = DType::f32;
  a.dims = std::move(dims);
  const uint64_t n = a.count();
  a.raw.resize(n * 4);
  auto* f = reinterpret_cast<float*>(a.raw.data());
  for (uint64_t i = 0; i < n; ++i) f[i] = static_cast<float>(data[i]);
  entries_[name] = std::move(a);
}

void Container::put_i64(const std::string& name, const int64_t* data,
                        std::vector<uint64_t> dims) {
  Array a;
  a.dtype = DType::i64;
  a.dims = std::move(dims);
  a.raw.resize(a.count() * 8);
  std::memcpy(a.raw.data(), data, a.raw.size());
  entries_[name] = std::move(a);
}

void Container::put_u8(const std::string& name, const uint8_t* data,
                       std::vector<uint64_t> dims) {
  Array a;
  a.dtype = DType::u8;
  a.dims = std::move(dims);
  a.raw.resize(a.count());
  std::memcpy(a.raw.data(), data, a.raw.size());
  entries_[name] = std::move(a);
}

void Container::put_string(const std::string& name, const std::string& s) {
  put_u8(name, reinterpret_cast<const uint8_t*>(s.data()), {s.size()});
}

const Array& Container::get(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end())
    throw FormatError("container: missing entry '" + name + "'");
  return it->second;
}

std::vector<double> Container::get_f64(const std::string& name) const {
  const Array& a = get(name);
  if (a.dtype != DType::f64) throw FormatError("container: '" + name + "' is not f64");
  std::vector<double> out(a.count());
  std::memcpy(out.data(), a.raw.data(), a.raw.size());
  return out;
}

std::vector<double> Container::get_f32_as_f64(const std::string& name) const {
  const Array& a = get(name);
  if (a.dtype != DType::f32) throw FormatError("container: '" + name + "' is not f32");
  std::vector<double> out(a.count());
  const auto* f = reinterpret_cast<const float*>(a.raw.data());
  for (uint64_t i = 0; i < a.count(); ++i) out[i] = static_cast<double>(f[i]);
  return out;
}

std::vector<int64_t> Container::get_i64(const std::string& name) const {
  const Array& a = get(name);
  if (a.dtype != DType::i64) throw FormatError("container: '" + name + "' is not i64");
  std::vector<int64_t> out(a.count());
  std::memcpy(out.data(), a.raw.data(), a.raw.size());
  return out;
}

std::vector<uint8_t> Container::get_u8(const std::string& name) const {
  const Array& a = get(name);
  if (a.dtype != DType::u8) throw FormatError("container: '" + name + "' is not u8");
  return std::vector<uint8_t>(a.raw.begin(), a.raw.end());
}

std::string Container::get_string(const std::string& name) const {
  const auto v = get_u8(name);
  return std::string(v.begin(), v.end());
}

double Container::get_scalar(const std::string& name) const {
  const auto v = get_f64(name);
  if (v.size() != 1) throw FormatError("container: '" + name + "' is not a scalar");
  return v[0];
}

void Container::write(const std::string& path) const {
  std::vector<unsigned char> buf;
  buf.insert(buf.end(), kMagic, kMagic + 8);
  append<uint32_t>(buf, static_cast<uint32_t>(entries_.size()));
  for (const auto& [name, a] : entries_) {
    append<uint32_t>(buf, static_cast<uint32_t>(name.size()));
    buf.insert(buf.end(), name.begin(), name.end());
    append<uint8_t>(buf, static_cast<uint8_t>(a.dtype));
    append<uint8_t>(buf, static_cast<uint8_t>(a.dims.size()));
    for (uint64_t d : a.dims) append<uint64_t>(buf, d);
    buf.insert(buf.end(), a.raw.begin(), a.raw.end());
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw FormatError("container: cannot open '" + path + "' for writing");
  f.write(reinterpret_cast<const char*>(buf.data()),
          static_cast<std::streamsize>(buf.size()));
  if (!f) throw FormatError("container: short write to '" + path + "'");
}

Container Container::read(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw FormatError("container: cannot open '" + path + "'");
  std::vector<unsigned char> buf((std::istreambuf_iterator<char>(f)),
                                 std::istreambuf_iterator<char>());
  size_t pos = 0;
  auto need = [&](size_t n) {
    if (pos + n > buf.size())
      throw FormatError("container: truncated file '" + path + "'");
  };
  auto read_raw = [&](void* dst, size_t n) {
    need(n);
    std::memcpy(dst, buf.data() + pos, n);
    pos += n;
  };

  char magic[8];
  read_raw(magic, 8);
  if (std::memcmp(magic, kMagic, 8) != 0)
    throw FormatError("container: bad magic in '" + path + "'");

  uint32_t count = 0;
  read_raw(&count, 4);
  Container c;
  for (uint32_t e = 0; e < count; ++e) {
    uint32_t name_len = 0;
    read_raw(&name_len, 4);
    if (name_len > 4096) throw FormatError("container: absurd name length");
    std::string name(name_len, '\0');
    read_raw(name.data(), name_len);

    Array a;
    uint8_t dtype = 0, ndim = 0;
    read_raw(&dtype, 1);
    if (dtype > 3) throw FormatError("container: bad dtype for '" + name + "'");
    a.dtype = static_cast<DType>(dtype);
    read_raw(&ndim, 1);
    a.dims.resize(ndim);
    for (auto& d : a.dims) read_raw(&d, 8);
    const uint64_t bytes = a.count() * dtype_size(a.dtype);
    if (bytes > buf.size()) throw FormatError("container: oversized array '" + name + "'");
    a.raw.resize(bytes);
    read_raw(a.raw.data(), bytes);
    c.entries_[name] = std::move(a);
  }
  return c;
}

}  // namespace hspn::io
