#pragma once

// Binary checkpoint records, little-endian as written by the host.
//
// Network record:
//   char[4]  "HRNN"
//   u32      format version (1)
//   u32      layer count L
//   L times: u32 rows, u32 cols, u32 activation, f64[rows*cols] W (column-major), f64[rows] b
//
// Adam record:
//   char[4]  "HRAD"
//   u32      format version (1)
//   u64      step
//   f64      lr, beta1, beta2, eps
//   u64      n
//   f64[n]   m, then f64[n] v

#include <iosfwd>
#include <string>

#include "hrelay/neural.hpp"

namespace hrelay {

inline constexpr std::uint32_t kCheckpointVersion = 1;

void write_mlp(std::ostream& os, const Mlp<double>& net);
Mlp<double> read_mlp(std::istream& is);

void write_adam(std::ostream& os, const AdamState<double>& st);
AdamState<double> read_adam(std::istream& is);

void save_mlp(const std::string& path, const Mlp<double>& net);
Mlp<double> load_mlp(const std::string& path);

}  // namespace hrelay
