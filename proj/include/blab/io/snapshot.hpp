#pragma once

#include <zlib.h>

#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "blab/boussinesq.hpp"
#include "blab/field.hpp"

namespace blab::io {

class SnapshotError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Named fields on one grid at time t.
struct Snapshot {
  Grid grid;
  double t = 0.0;
  std::vector<std::string> names;
  std::vector<Field> fields;

  const Field& field(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i) {
      if (names[i] == name) return fields[i];
    }
    throw SnapshotError("snapshot has no field named '" + name + "'");
  }
};

namespace detail {

/// Shortest decimal that round-trips to the same double.
inline std::string shortest(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

inline std::uint32_t crc32_of(const std::string& bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  crc = crc32(crc, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(bytes.size()));
  return static_cast<std::uint32_t>(crc);
}

inline void put_le64(std::string& out, double x) {
  std::uint64_t u = std::bit_cast<std::uint64_t>(x);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((u >> (8 * i)) & 0xff));
}

inline double get_le64(const char* p) {
  std::uint64_t u = 0;
  for (int i = 0; i < 8; ++i) u |= std::uint64_t(static_cast<unsigned char>(p[i])) << (8 * i);
  return std::bit_cast<double>(u);
}

}  // namespace detail

/// BLAB1 layout:
///   BLAB1 n=<n> period=<float> fields=<a,b,...> t=<float>\n
///   payload: each field as n*n little-endian float64, x1 fastest
///   trailer: CRC32 of the payload, 4 bytes little-endian
inline std::string encode_snapshot(const Snapshot& s) {
  if (s.names.empty() || s.names.size() != s.fields.size()) throw SnapshotError("snapshot needs named fields");
  std::string names;
  for (const auto& n : s.names) {
    if (n.empty() || n.find_first_of(", \n=") != std::string::npos) throw SnapshotError("bad field name '" + n + "'");
    names += (names.empty() ? "" : ",") + n;
  }
  std::string out = "BLAB1 n=" + std::to_string(s.grid.n()) + " period=" + detail::shortest(s.grid.period()) +
                    " fields=" + names + " t=" + detail::shortest(s.t) + "\n";
  std::string payload;
  payload.reserve(s.fields.size() * s.grid.size() * 8);
  for (const auto& f : s.fields) {
    require_same_grid(f.grid, s.grid, "snapshot field");
    for (double x : f.values) detail::put_le64(payload, x);
  }
  const std::uint32_t crc = detail::crc32_of(payload);
  out += payload;
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((crc >> (8 * i)) & 0xff));
  return out;
}

inline Snapshot decode_snapshot(const std::string& bytes, double dealias_fraction = 2.0 / 3.0) {
  const auto nl = bytes.find('\n');
  if (nl == std::string::npos || nl > 4096) throw SnapshotError("malformed header: no header line");
  std::istringstream header(bytes.substr(0, nl));
  std::string magic;
  header >> magic;
  if (magic != "BLAB1") throw SnapshotError("malformed header: bad magic '" + magic + "'");
  long long n = -1;
  double period = -1.0, t = 0.0;
  bool have_t = false;
  std::vector<std::string> names;
  std::string tok;
  while (header >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) throw SnapshotError("malformed header: token '" + tok + "'");
    const std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
    const char* b = val.data();
    const char* e = val.data() + val.size();
    if (key == "n") {
      auto [p, ec] = std::from_chars(b, e, n);
      if (ec != std::errc() || p != e) throw SnapshotError("malformed header: n='" + val + "'");
    } else if (key == "period") {
      auto [p, ec] = std::from_chars(b, e, period);
      if (ec != std::errc() || p != e) throw SnapshotError("malformed header: period='" + val + "'");
    } else if (key == "t") {
      auto [p, ec] = std::from_chars(b, e, t);
      if (ec != std::errc() || p != e) throw SnapshotError("malformed header: t='" + val + "'");
      have_t = true;
    } else if (key == "fields") {
      std::size_t start = 0;
      while (start <= val.size()) {
        const auto c = val.find(',', start);
        names.push_back(val.substr(start, c == std::string::npos ? std::string::npos : c - start));
        if (names.back().empty()) throw SnapshotError("malformed header: empty field name");
        if (c == std::string::npos) break;
        start = c + 1;
      }
    } else {
      throw SnapshotError("malformed header: unknown key '" + key + "'");
    }
  }
  if (n < 0 || period < 0 || names.empty() || !have_t) throw SnapshotError("malformed header: missing n, period, fields or t");
  Grid grid = [&] {
    try {
      return Grid(static_cast<int>(n), period, dealias_fraction);
    } catch (const std::exception& ex) {
      throw SnapshotError(std::string("malformed header: ") + ex.what());
    }
  }();

  const std::size_t payload_bytes = names.size() * grid.size() * 8;
  const std::size_t expected = nl + 1 + payload_bytes + 4;
  if (bytes.size() < expected) {
    throw SnapshotError("truncated payload: expected " + std::to_string(expected) + " bytes, got " +
                        std::to_string(bytes.size()));
  }
  if (bytes.size() > expected) {
    throw SnapshotError("length mismatch: header n=" + std::to_string(n) + " implies " + std::to_string(expected) +
                        " bytes, file has " + std::to_string(bytes.size()));
  }
  const std::string payload = bytes.substr(nl + 1, payload_bytes);
  std::uint32_t stored = 0;
  for (int i = 0; i < 4; ++i) {
    stored |= std::uint32_t(static_cast<unsigned char>(bytes[nl + 1 + payload_bytes + i])) << (8 * i);
  }
  if (stored != detail::crc32_of(payload)) throw SnapshotError("checksum mismatch");

  Snapshot s{grid, t, names, {}};
  const char* p = payload.data();
  for (std::size_t f = 0; f < names.size(); ++f) {
    Field fld(grid);
    for (auto& x : fld.values) {
      x = detail::get_le64(p);
      p += 8;
    }
    s.fields.push_back(std::move(fld));
  }
  return s;
}

inline void write_snapshot(const Snapshot& s, const std::string& path) {
  const std::string bytes = encode_snapshot(s);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw SnapshotError("cannot open '" + path + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw SnapshotError("write failed for '" + path + "'");
}

inline Snapshot read_snapshot(const std::string& path, double dealias_fraction = 2.0 / 3.0) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SnapshotError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return decode_snapshot(ss.str(), dealias_fraction);
}

inline Snapshot to_snapshot(const SimState& s) { return {s.grid(), s.t, {"omega", "theta"}, {s.omega, s.theta}}; }

inline SimState to_sim_state(const Snapshot& s) { return {s.field("omega"), s.field("theta"), s.t}; }

inline void write_snapshot(const SimState& s, const std::string& path) { write_snapshot(to_snapshot(s), path); }

}  // namespace blab::io
