#include "coinccl/io.hpp"

#include <algorithm>
#include <bit>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "coinccl/errors.hpp"

namespace coinccl {

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw io_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad())
    throw io_error("read failed on " + path);
  return ss.str();
}

void write_text_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw io_error("cannot create " + path);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.flush();
  if (!out)
    throw io_error("write failed on " + path);
}

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// strtod instead of std::stod: stod throws out_of_range on gradual
// underflow, which would reject subnormals the writer itself produces.
// Overflow still fails; underflow keeps the rounded subnormal or zero.
bool parse_double(const std::string& tok, double& out) {
  if (tok.empty())
    return false;
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end != tok.c_str() + tok.size())
    return false;
  if (errno == ERANGE && std::abs(v) == HUGE_VAL)
    return false;
  out = v;
  return true;
}

void append_values(std::string& out, const std::vector<double>& vs) {
  for (std::size_t i = 0; i < vs.size(); ++i) {
    if (i)
      out += ' ';
    out += fmt_double(vs[i]);
  }
}

std::vector<double> parse_values(const std::string& text,
                                 const std::string& path, long line) {
  std::vector<double> out;
  std::istringstream ss(text);
  std::string tok;
  while (ss >> tok) {
    double v = 0.0;
    if (!parse_double(tok, v))
      throw parse_error("bad number '" + tok + "'", path, line);
    out.push_back(v);
  }
  return out;
}

// little-endian encode helpers for the binary formats
void put_u16(std::string& b, std::uint16_t v) {
  b.push_back(static_cast<char>(v & 0xff));
  b.push_back(static_cast<char>(v >> 8));
}

void put_u32(std::string& b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i)
    b.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& b, std::uint64_t v) {
  for (int i = 0; i < 8; ++i)
    b.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& b, double v) {
  put_u64(b, std::bit_cast<std::uint64_t>(v));
}

struct ByteReader {
  const std::string& buf;
  const std::string& path;
  std::size_t pos = 0;

  void need(std::size_t n) const {
    if (pos + n > buf.size())
      throw parse_error("truncated file", path, 0);
  }
  std::uint16_t u16() {
    need(2);
    std::uint16_t v = 0;
    for (int i = 0; i < 2; ++i)
      v |= static_cast<std::uint16_t>(
          static_cast<unsigned char>(buf[pos + i]) << (8 * i));
    pos += 2;
    return v;
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(buf[pos + i]))
           << (8 * i);
    pos += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[pos + i]))
           << (8 * i);
    pos += 8;
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str(std::size_t n) {
    need(n);
    std::string s = buf.substr(pos, n);
    pos += n;
    return s;
  }
};

nlohmann::json parse_json(const std::string& text, const std::string& path,
                          long line = 0) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw parse_error(e.what(), path, line);
  }
}

} // namespace

void write_matrix_text(const std::string& path, const Matrix& m,
                       const MatrixMeta& meta) {
  if (!meta.row_values.empty() && meta.row_values.size() != m.rows())
    throw validation_error("row_values size does not match matrix rows");
  if (!meta.col_values.empty() && meta.col_values.size() != m.cols())
    throw validation_error("col_values size does not match matrix cols");

  std::string out;
  out += "# coinccl-matrix v1\n";
  out += "# config_hash " + hash_hex(meta.config_hash) + "\n";
  out += "# rows " + std::to_string(m.rows()) + "\n";
  out += "# cols " + std::to_string(m.cols()) + "\n";
  out += "# row_axis " + meta.row_axis + "\n";
  out += "# col_axis " + meta.col_axis + "\n";
  if (!meta.units.empty())
    out += "# units " + meta.units + "\n";
  if (!meta.row_values.empty()) {
    out += "# row_values ";
    append_values(out, meta.row_values);
    out += '\n';
  }
  if (!meta.col_values.empty()) {
    out += "# col_values ";
    append_values(out, meta.col_values);
    out += '\n';
  }
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      if (c)
        out += ' ';
      out += fmt_double(m(r, c));
    }
    out += '\n';
  }
  write_text_file(path, out);
}

Matrix read_matrix_text(const std::string& path, MatrixMeta* meta) {
  std::istringstream in(read_text_file(path));
  std::string line;
  long lineno = 0;

  if (!std::getline(in, line) || line != "# coinccl-matrix v1")
    throw parse_error("missing 'coinccl-matrix v1' header", path, 1);
  ++lineno;

  MatrixMeta md;
  std::size_t rows = 0, cols = 0;
  bool have_rows = false, have_cols = false;
  std::vector<double> data;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty())
      continue;
    if (line[0] == '#') {
      std::string body = line.substr(1);
      std::istringstream ls(body);
      std::string key;
      ls >> key;
      std::string rest;
      std::getline(ls, rest);
      if (!rest.empty() && rest[0] == ' ')
        rest.erase(0, 1);
      if (key == "config_hash") {
        try {
          md.config_hash = std::stoull(rest, nullptr, 16);
        } catch (const std::exception&) {
          throw parse_error("bad config_hash '" + rest + "'", path, lineno);
        }
      } else if (key == "rows") {
        try {
          rows = static_cast<std::size_t>(std::stoull(rest));
        } catch (const std::exception&) {
          throw parse_error("bad rows '" + rest + "'", path, lineno);
        }
        have_rows = true;
      } else if (key == "cols") {
        try {
          cols = static_cast<std::size_t>(std::stoull(rest));
        } catch (const std::exception&) {
          throw parse_error("bad cols '" + rest + "'", path, lineno);
        }
        have_cols = true;
      } else if (key == "row_axis") {
        md.row_axis = rest;
      } else if (key == "col_axis") {
        md.col_axis = rest;
      } else if (key == "units") {
        md.units = rest;
      } else if (key == "row_values") {
        md.row_values = parse_values(rest, path, lineno);
      } else if (key == "col_values") {
        md.col_values = parse_values(rest, path, lineno);
      }
      // unknown comment keys are ignored
      continue;
    }
    std::vector<double> row = parse_values(line, path, lineno);
    if (have_cols && row.size() != cols)
      throw parse_error("expected " + std::to_string(cols) + " columns, got " +
                            std::to_string(row.size()),
                        path, lineno);
    data.insert(data.end(), row.begin(), row.end());
  }
  if (!have_rows || !have_cols)
    throw parse_error("header lacks rows/cols", path, lineno);
  if (data.size() != rows * cols)
    throw parse_error("expected " + std::to_string(rows * cols) +
                          " values, got " + std::to_string(data.size()),
                      path, lineno);
  if (!md.row_values.empty() && md.row_values.size() != rows)
    throw parse_error("row_values size mismatch", path, lineno);
  if (!md.col_values.empty() && md.col_values.size() != cols)
    throw parse_error("col_values size mismatch", path, lineno);

  Matrix m(rows, cols);
  std::copy(data.begin(), data.end(), m.data());
  if (meta)
    *meta = std::move(md);
  return m;
}

void write_matrix_binary(const std::string& path, const Matrix& m,
                         const MatrixMeta& meta) {
  if (!meta.row_values.empty() && meta.row_values.size() != m.rows())
    throw validation_error("row_values size does not match matrix rows");
  if (!meta.col_values.empty() && meta.col_values.size() != m.cols())
    throw validation_error("col_values size does not match matrix cols");

  std::string b;
  b.reserve(64 + 8 * m.size());
  b += "CCLM";
  put_u32(b, 1);
  put_u64(b, meta.config_hash);
  put_u64(b, m.rows());
  put_u64(b, m.cols());
  auto put_str = [&](const std::string& s) {
    put_u32(b, static_cast<std::uint32_t>(s.size()));
    b += s;
  };
  put_str(meta.row_axis);
  put_str(meta.col_axis);
  put_str(meta.units);
  b.push_back(meta.row_values.empty() ? 0 : 1);
  for (double v : meta.row_values)
    put_f64(b, v);
  b.push_back(meta.col_values.empty() ? 0 : 1);
  for (double v : meta.col_values)
    put_f64(b, v);
  for (std::size_t i = 0; i < m.size(); ++i)
    put_f64(b, m.data()[i]);
  write_text_file(path, b);
}

Matrix read_matrix_binary(const std::string& path, MatrixMeta* meta) {
  const std::string buf = read_text_file(path);
  ByteReader r{buf, path};
  if (r.str(4) != "CCLM")
    throw parse_error("bad magic, not a coinccl matrix", path, 0);
  const std::uint32_t version = r.u32();
  if (version != 1)
    throw parse_error("unsupported version " + std::to_string(version), path,
                      0);
  MatrixMeta md;
  md.config_hash = r.u64();
  const std::uint64_t rows = r.u64();
  const std::uint64_t cols = r.u64();
  if (rows > (1ull << 32) || cols > (1ull << 32) ||
      (rows && cols > buf.size() / rows))
    throw parse_error("implausible matrix dimensions", path, 0);
  md.row_axis = r.str(r.u32());
  md.col_axis = r.str(r.u32());
  md.units = r.str(r.u32());
  r.need(1);
  if (buf[r.pos++]) {
    md.row_values.resize(rows);
    for (auto& v : md.row_values)
      v = r.f64();
  }
  r.need(1);
  if (buf[r.pos++]) {
    md.col_values.resize(cols);
    for (auto& v : md.col_values)
      v = r.f64();
  }
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < m.size(); ++i)
    m.data()[i] = r.f64();
  if (r.pos != buf.size())
    throw parse_error("trailing bytes after matrix data", path, 0);
  if (meta)
    *meta = std::move(md);
  return m;
}

namespace {

void write_sidecar(const std::string& path, const char* format,
                   std::uint64_t count, std::uint64_t config_hash,
                   const std::vector<std::pair<const char*, double>>& ticks) {
  nlohmann::json j;
  j["format"] = format;
  for (const auto& [key, value] : ticks)
    j[key] = value;
  j["count"] = count;
  j["config_hash"] = hash_hex(config_hash);
  write_text_file(path + ".json", j.dump(2) + "\n");
}

// sidecar lookup; absent file or absent key leaves the default in place
void read_sidecar(const std::string& path,
                  const std::vector<std::pair<const char*, double*>>& ticks) {
  const std::string side = path + ".json";
  if (!std::filesystem::exists(side))
    return;
  nlohmann::json j = parse_json(read_text_file(side), side);
  for (const auto& [key, slot] : ticks) {
    if (j.contains(key)) {
      const double v = j[key].get<double>();
      if (!(v > 0))
        throw parse_error(std::string("tick '") + key + "' must be positive",
                          side, 0);
      *slot = v;
    }
  }
}

} // namespace

void write_hits_binary(const std::string& path,
                       const std::vector<ElectronHit>& hits,
                       const EventTicks& ticks, std::uint64_t config_hash) {
  std::string b;
  b.reserve(14 * hits.size());
  for (const ElectronHit& h : hits) {
    put_u16(b, h.x);
    put_u16(b, h.y);
    put_u64(b, static_cast<std::uint64_t>(
                   std::llround(h.toa_ns / ticks.toa_tick_ns)));
    const long long tot = std::llround(h.tot_ns / ticks.tot_tick_ns);
    put_u16(b, static_cast<std::uint16_t>(std::clamp(tot, 0ll, 65535ll)));
  }
  write_text_file(path, b);
  write_sidecar(path, "coinccl-hits v1", hits.size(), config_hash,
                {{"toa_tick_ns", ticks.toa_tick_ns},
                 {"tot_tick_ns", ticks.tot_tick_ns}});
}

std::vector<ElectronHit> read_hits_binary(const std::string& path) {
  EventTicks ticks;
  read_sidecar(path, {{"toa_tick_ns", &ticks.toa_tick_ns},
                      {"tot_tick_ns", &ticks.tot_tick_ns}});
  const std::string buf = read_text_file(path);
  if (buf.size() % 14 != 0)
    throw parse_error("hits file size is not a multiple of the 14-byte record",
                      path, 0);
  ByteReader r{buf, path};
  std::vector<ElectronHit> hits(buf.size() / 14);
  for (ElectronHit& h : hits) {
    h.x = r.u16();
    h.y = r.u16();
    h.toa_ns = static_cast<double>(r.u64()) * ticks.toa_tick_ns;
    h.tot_ns = static_cast<double>(r.u16()) * ticks.tot_tick_ns;
  }
  return hits;
}

void write_photons_binary(const std::string& path,
                          const std::vector<PhotonTag>& photons,
                          const EventTicks& ticks, std::uint64_t config_hash) {
  std::string b;
  b.reserve(9 * photons.size());
  for (const PhotonTag& p : photons) {
    put_u64(b, static_cast<std::uint64_t>(
                   std::llround(p.t_ns / ticks.photon_tick_ns)));
    b.push_back(static_cast<char>(p.channel));
  }
  write_text_file(path, b);
  write_sidecar(path, "coinccl-photons v1", photons.size(), config_hash,
                {{"t_tick_ns", ticks.photon_tick_ns}});
}

std::vector<PhotonTag> read_photons_binary(const std::string& path) {
  EventTicks ticks;
  read_sidecar(path, {{"t_tick_ns", &ticks.photon_tick_ns}});
  const std::string buf = read_text_file(path);
  if (buf.size() % 9 != 0)
    throw parse_error(
        "photons file size is not a multiple of the 9-byte record", path, 0);
  ByteReader r{buf, path};
  std::vector<PhotonTag> photons(buf.size() / 9);
  for (PhotonTag& p : photons) {
    p.t_ns = static_cast<double>(r.u64()) * ticks.photon_tick_ns;
    r.need(1);
    p.channel = static_cast<std::uint8_t>(buf[r.pos++]);
  }
  return photons;
}

void write_hits_csv(const std::string& path,
                    const std::vector<ElectronHit>& hits) {
  std::string out = "x,y,toa_ns,tot_ns\n";
  for (const ElectronHit& h : hits) {
    out += std::to_string(h.x) + ',' + std::to_string(h.y) + ',' +
           fmt_double(h.toa_ns) + ',' + fmt_double(h.tot_ns) + '\n';
  }
  write_text_file(path, out);
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

double csv_double(const std::string& tok, const std::string& path, long line) {
  double v = 0.0;
  if (!parse_double(tok, v))
    throw parse_error("bad number '" + tok + "'", path, line);
  return v;
}

} // namespace

std::vector<ElectronHit> read_hits_csv(const std::string& path) {
  std::istringstream in(read_text_file(path));
  std::string line;
  long lineno = 0;
  std::vector<ElectronHit> hits;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || (lineno == 1 && line.rfind("x,", 0) == 0))
      continue;
    const auto f = split_csv(line);
    if (f.size() != 4)
      throw parse_error("expected 4 fields", path, lineno);
    ElectronHit h;
    h.x = static_cast<std::uint16_t>(csv_double(f[0], path, lineno));
    h.y = static_cast<std::uint16_t>(csv_double(f[1], path, lineno));
    h.toa_ns = csv_double(f[2], path, lineno);
    h.tot_ns = csv_double(f[3], path, lineno);
    hits.push_back(h);
  }
  return hits;
}

void write_photons_csv(const std::string& path,
                       const std::vector<PhotonTag>& photons) {
  std::string out = "t_ns,channel\n";
  for (const PhotonTag& p : photons)
    out += fmt_double(p.t_ns) + ',' + std::to_string(p.channel) + '\n';
  write_text_file(path, out);
}

std::vector<PhotonTag> read_photons_csv(const std::string& path) {
  std::istringstream in(read_text_file(path));
  std::string line;
  long lineno = 0;
  std::vector<PhotonTag> photons;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || (lineno == 1 && line.rfind("t_ns,", 0) == 0))
      continue;
    const auto f = split_csv(line);
    if (f.size() != 2)
      throw parse_error("expected 2 fields", path, lineno);
    PhotonTag p;
    p.t_ns = csv_double(f[0], path, lineno);
    p.channel = static_cast<std::uint8_t>(csv_double(f[1], path, lineno));
    photons.push_back(p);
  }
  return photons;
}

void write_truth(const std::string& path, const GroundTruth& truth,
                 std::uint64_t config_hash) {
  std::string out;
  {
    nlohmann::json meta;
    meta["format"] = "coinccl-truth v1";
    meta["electrons_total"] = truth.electrons_total;
    meta["electrons_detected"] = truth.electrons_detected;
    std::string kinds(truth.photon_kind.size(), '0');
    for (std::size_t i = 0; i < truth.photon_kind.size(); ++i)
      kinds[i] = static_cast<char>('0' + truth.photon_kind[i]);
    meta["photon_kinds"] = kinds;
    meta["config_hash"] = hash_hex(config_hash);
    out += meta.dump() + "\n";
  }
  for (const TruthPair& p : truth.pairs) {
    nlohmann::json j;
    j["electron_id"] = p.electron_id;
    j["photon_id"] = p.photon_id;
    j["energy_eV"] = p.energy_eV;
    j["qx_per_nm"] = p.qx_per_nm;
    j["qy_per_nm"] = p.qy_per_nm;
    j["electron_detected"] = p.electron_detected;
    j["electron_toa_ns"] = p.electron_toa_ns;
    j["photon_t_ns"] = p.photon_t_ns;
    out += j.dump() + "\n";
  }
  write_text_file(path, out);
}

GroundTruth read_truth(const std::string& path) {
  std::istringstream in(read_text_file(path));
  std::string line;
  if (!std::getline(in, line))
    throw parse_error("empty truth file", path, 1);
  nlohmann::json meta = parse_json(line, path, 1);
  if (!meta.contains("format") ||
      meta["format"].get<std::string>() != "coinccl-truth v1")
    throw parse_error("missing 'coinccl-truth v1' meta record", path, 1);

  GroundTruth truth;
  truth.electrons_total = meta.value("electrons_total", std::uint64_t{0});
  truth.electrons_detected =
      meta.value("electrons_detected", std::uint64_t{0});
  const std::string kinds = meta.value("photon_kinds", std::string());
  truth.photon_kind.reserve(kinds.size());
  for (std::size_t i = 0; i < kinds.size(); ++i) {
    if (kinds[i] < '0' || kinds[i] > '2')
      throw parse_error("photon kind digit out of range", path, 1);
    truth.photon_kind.push_back(static_cast<std::uint8_t>(kinds[i] - '0'));
  }

  long lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty())
      continue;
    nlohmann::json j = parse_json(line, path, lineno);
    TruthPair p;
    try {
      p.electron_id = j.at("electron_id").get<std::uint64_t>();
      p.photon_id = j.at("photon_id").get<std::uint64_t>();
      p.energy_eV = j.at("energy_eV").get<double>();
      p.qx_per_nm = j.at("qx_per_nm").get<double>();
      p.qy_per_nm = j.at("qy_per_nm").get<double>();
      p.electron_detected = j.at("electron_detected").get<bool>();
      p.electron_toa_ns = j.at("electron_toa_ns").get<double>();
      p.photon_t_ns = j.at("photon_t_ns").get<double>();
    } catch (const nlohmann::json::exception& e) {
      throw parse_error(e.what(), path, lineno);
    }
    truth.pairs.push_back(p);
  }
  return truth;
}

} // namespace coinccl
