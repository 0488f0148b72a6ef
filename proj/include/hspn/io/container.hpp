#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "hspn/core/mat.hpp"

namespace hspn::io {

/// Error for unreadable or malformed container files.
struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class DType : uint8_t { f64 = 0, f32 = 1, i64 = 2, u8 = 3 };

struct Array {
  DType dtype = DType::f64;
  std::vector<uint64_t> dims;
  std::vector<unsigned char> raw;

  uint64_t count() const {
    uint64_t n = 1;
    for (auto d : dims) n *= d;
    return n;
  }
};

/// Versioned binary container of named arrays (little-endian, layout in the
/// README). One file holds a checkpoint section set or one dataset sample.
class Container {
 public:
  static constexpr char kMagic[9] = "HSPNBIN1";

  bool has(const std::string& name) const { return entries_.count(name) != 0; }
  std::vector<std::string> names() const;

  void put_f64(const std::string& name, const double* data, std::vector<uint64_t> dims);
  void put_f32(const std::string& name, const float* data, std::vector<uint64_t> dims);
  /// Doubles narrowed to f32 on write (dataset array convention).
  void put_f32_from_f64(const std::string& name, const double* data,
                        std::vector<uint64_t> dims);
  void put_i64(const std::string& name, const int64_t* data, std::vector<uint64_t> dims);
  void put_u8(const std::string& name, const uint8_t* data, std::vector<uint64_t> dims);
  void put_string(const std::string& name, const std::string& s);
  void put_scalar(const std::string& name, double v) { put_f64(name, &v, {1}); }

  const Array& get(const std::string& name) const;
  std::vector<double> get_f64(const std::string& name) const;
  /// f32 arrays widened back to double.
  std::vector<double> get_f32_as_f64(const std::string& name) const;
  std::vector<int64_t> get_i64(const std::string& name) const;
  std::vector<uint8_t> get_u8(const std::string& name) const;
  std::string get_string(const std::string& name) const;
  double get_scalar(const std::string& name) const;

  void write(const std::string& path) const;
  static Container read(const std::string& path);

 private:
  std::map<std::string, Array> entries_;
};

}  // namespace hspn::io
