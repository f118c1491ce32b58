#include "hrelay/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace hrelay {

namespace {

template <typename T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
  T v{};
  if (!is.read(reinterpret_cast<char*>(&v), sizeof(T)))
    throw StructuralError("checkpoint: truncated record");
  return v;
}

void put_doubles(std::ostream& os, const double* p, Eigen::Index n) {
  os.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(n * sizeof(double)));
}

void get_doubles(std::istream& is, double* p, Eigen::Index n) {
  if (!is.read(reinterpret_cast<char*>(p), static_cast<std::streamsize>(n * sizeof(double))))
    throw StructuralError("checkpoint: truncated record");
}

void expect_header(std::istream& is, const char* magic) {
  char m[4];
  if (!is.read(m, 4) || std::memcmp(m, magic, 4) != 0)
    throw StructuralError(std::string("checkpoint: bad magic, expected ") + magic);
  const auto version = get<std::uint32_t>(is);
  if (version != kCheckpointVersion)
    throw StructuralError("checkpoint: unsupported version " + std::to_string(version));
}

}  // namespace

void write_mlp(std::ostream& os, const Mlp<double>& net) {
  os.write("HRNN", 4);
  put<std::uint32_t>(os, kCheckpointVersion);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(net.layers().size()));
  for (const auto& l : net.layers()) {
    put<std::uint32_t>(os, static_cast<std::uint32_t>(l.W.rows()));
    put<std::uint32_t>(os, static_cast<std::uint32_t>(l.W.cols()));
    put<std::uint32_t>(os, static_cast<std::uint32_t>(l.act));
    put_doubles(os, l.W.data(), l.W.size());
    put_doubles(os, l.b.data(), l.b.size());
  }
}

Mlp<double> read_mlp(std::istream& is) {
  expect_header(is, "HRNN");
  const auto count = get<std::uint32_t>(is);
  std::vector<Mlp<double>::Layer> layers(count);
  for (auto& l : layers) {
    const auto rows = get<std::uint32_t>(is);
    const auto cols = get<std::uint32_t>(is);
    const auto act = get<std::uint32_t>(is);
    if (act > static_cast<std::uint32_t>(Activation::sigmoid))
      throw StructuralError("checkpoint: unknown activation");
    l.act = static_cast<Activation>(act);
    l.W.resize(rows, cols);
    l.b.resize(rows);
    get_doubles(is, l.W.data(), l.W.size());
    get_doubles(is, l.b.data(), l.b.size());
  }
  return Mlp<double>(std::move(layers));
}

void write_adam(std::ostream& os, const AdamState<double>& st) {
  os.write("HRAD", 4);
  put<std::uint32_t>(os, kCheckpointVersion);
  put<std::uint64_t>(os, st.step);
  put<double>(os, st.lr);
  put<double>(os, st.beta1);
  put<double>(os, st.beta2);
  put<double>(os, st.eps);
  put<std::uint64_t>(os, static_cast<std::uint64_t>(st.m.size()));
  put_doubles(os, st.m.data(), st.m.size());
  put_doubles(os, st.v.data(), st.v.size());
}

AdamState<double> read_adam(std::istream& is) {
  expect_header(is, "HRAD");
  AdamState<double> st;
  st.step = get<std::uint64_t>(is);
  st.lr = get<double>(is);
  st.beta1 = get<double>(is);
  st.beta2 = get<double>(is);
  st.eps = get<double>(is);
  const auto n = static_cast<Eigen::Index>(get<std::uint64_t>(is));
  st.m.resize(n);
  st.v.resize(n);
  get_doubles(is, st.m.data(), n);
  get_doubles(is, st.v.data(), n);
  return st;
}

void save_mlp(const std::string& path, const Mlp<double>& net) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  write_mlp(os, net);
  if (!os) throw std::runtime_error("write failed: " + path);
}

Mlp<double> load_mlp(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  return read_mlp(is);
}

}  // namespace hrelay
