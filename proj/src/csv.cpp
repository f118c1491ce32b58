#include <cstdio>
#include <fstream>
#include <sstream>

#include "hrelay/sweep.hpp"

namespace hrelay {

const char* const kCsvHeader = "scheme,p_t_dbm,L_e_db,N,seed,episode,reward_mean,reward_std,runtime_ms,modes";

std::string modes_to_bits(const ModeVector& modes) {
  std::string s;
  for (bool b : modes) s.push_back(b ? '1' : '0');
  return s;
}

ModeVector bits_to_modes(const std::string& bits) {
  ModeVector m;
  for (char c : bits) {
    if (c != '0' && c != '1') throw StructuralError("bits_to_modes: expected 0/1, got '" + bits + "'");
    m.push_back(c == '1');
  }
  return m;
}

namespace {

std::string g6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

std::string format_row(const ResultRow& r) {
  std::string s = r.scheme;
  s += ',' + g6(r.p_t_dbm);
  s += ',' + g6(r.le_db);
  s += ',' + std::to_string(r.n);
  s += ',' + std::to_string(r.seed);
  s += ',' + std::to_string(r.episode);
  s += ',' + g6(r.reward_mean);
  s += ',' + g6(r.reward_std);
  s += ',' + g6(r.runtime_ms);
  s += ',' + modes_to_bits(r.modes);
  return s;
}

void emit_csv(const std::vector<ResultRow>& rows, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  os << kCsvHeader << '\n';
  for (const auto& r : rows) os << format_row(r) << '\n';
  os.flush();
  if (!os) throw std::runtime_error("write failed: " + path);
}

std::vector<ResultRow> read_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  std::string line;
  if (!std::getline(is, line) || line != kCsvHeader) throw StructuralError(path + ": unexpected CSV header");
  std::vector<ResultRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (!line.empty() && line.back() == ',') f.emplace_back();
    if (f.size() != 10) throw StructuralError(path + ": expected 10 fields in '" + line + "'");
    ResultRow r;
    r.scheme = f[0];
    r.p_t_dbm = std::stod(f[1]);
    r.le_db = std::stod(f[2]);
    r.n = std::stoi(f[3]);
    r.seed = std::stoull(f[4]);
    r.episode = std::stoi(f[5]);
    r.reward_mean = std::stod(f[6]);
    r.reward_std = std::stod(f[7]);
    r.runtime_ms = std::stod(f[8]);
    r.modes = bits_to_modes(f[9]);
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace hrelay
