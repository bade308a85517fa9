#include "ivlab/io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace ivlab {

using nlohmann::json;

namespace {

json domain_json(const TorusDomain& dom) {
  json j;
  j["n"] = dom.n;
  j["periods"] = std::vector<Real>(dom.periods.begin(), dom.periods.begin() + dom.n);
  j["grid"] = std::vector<int>(dom.grid.begin(), dom.grid.begin() + dom.n);
  return j;
}

TorusDomain domain_from_json(const json& j) {
  TorusDomain dom;
  dom.n = j.at("n").get<int>();
  auto per = j.at("periods").get<std::vector<Real>>();
  auto grid = j.at("grid").get<std::vector<int>>();
  for (int a = 0; a < dom.n; ++a) {
    dom.periods[a] = per.at(a);
    dom.grid[a] = grid.at(a);
  }
  if (dom.n == 2) dom.grid[2] = 1;
  dom.validate();
  return dom;
}

void write_payload(const std::string& path, const std::vector<Real>& payload) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.write(reinterpret_cast<const char*>(payload.data()),
            static_cast<std::streamsize>(payload.size() * sizeof(Real)));
}

std::vector<Real> read_payload(const std::string& path, size_t expect) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::vector<Real> payload(expect);
  in.read(reinterpret_cast<char*>(payload.data()),
          static_cast<std::streamsize>(expect * sizeof(Real)));
  if (static_cast<size_t>(in.gcount()) != expect * sizeof(Real))
    throw std::runtime_error("truncated payload in " + path);
  return payload;
}

}  // namespace

void save_field(const ScalarField& f, const std::string& base) {
  f.validate();
  std::vector<Real> payload;
  payload.reserve(2 * f.dom.sites());
  for (std::int64_t i = 0; i < f.dom.sites(); ++i) {
    payload.push_back(f.values[i].real());
    payload.push_back(f.values[i].imag());
  }
  write_payload(base + ".bin", payload);
  json j;
  j["format_version"] = 1;
  j["kind"] = "scalar_field";
  j["domain"] = domain_json(f.dom);
  j["epsilon"] = f.epsilon;
  j["layout"] = "row-major complex f64 little-endian";
  std::ofstream out(base + ".json");
  out << j.dump(2) << "\n";
}

void save_field(const GaugePair& p, const std::string& base) {
  p.validate();
  std::vector<Real> payload;
  const std::int64_t N = p.dom.sites();
  payload.reserve((2 + p.dom.n) * N);
  for (std::int64_t i = 0; i < N; ++i) {
    payload.push_back(p.u[i].real());
    payload.push_back(p.u[i].imag());
  }
  for (int j = 0; j < p.dom.n; ++j)
    for (std::int64_t i = 0; i < N; ++i) payload.push_back(p.a[j][i]);
  write_payload(base + ".bin", payload);
  json j;
  j["format_version"] = 1;
  j["kind"] = "gauge_pair";
  j["domain"] = domain_json(p.dom);
  j["epsilon"] = p.epsilon;
  j["degree"] = p.degree;
  j["twist"] = {{"plane", {0, 1}},
                {"a1_jump", p.twist_jump()},
                {"u_phase", "exp(i 2 pi d x1 / L1) across axis 0"}};
  j["layout"] = "site complex block then one f64 block per link axis, little-endian";
  std::ofstream out(base + ".json");
  out << j.dump(2) << "\n";
}

ScalarField load_scalar_field(const std::string& base) {
  std::ifstream in(base + ".json");
  if (!in) throw std::runtime_error("cannot read " + base + ".json");
  json j;
  in >> j;
  if (j.at("kind") != "scalar_field") throw std::runtime_error("not a scalar_field checkpoint");
  ScalarField f;
  f.dom = domain_from_json(j.at("domain"));
  f.epsilon = j.at("epsilon").get<Real>();
  const std::int64_t N = f.dom.sites();
  auto payload = read_payload(base + ".bin", static_cast<size_t>(2 * N));
  f.values = ArrayXcd::Zero(N);
  for (std::int64_t i = 0; i < N; ++i) f.values[i] = Complex(payload[2 * i], payload[2 * i + 1]);
  f.validate();
  return f;
}

GaugePair load_gauge_pair(const std::string& base) {
  std::ifstream in(base + ".json");
  if (!in) throw std::runtime_error("cannot read " + base + ".json");
  json j;
  in >> j;
  if (j.at("kind") != "gauge_pair") throw std::runtime_error("not a gauge_pair checkpoint");
  GaugePair p;
  p.dom = domain_from_json(j.at("domain"));
  p.epsilon = j.at("epsilon").get<Real>();
  p.degree = j.at("degree").get<int>();
  const std::int64_t N = p.dom.sites();
  auto payload = read_payload(base + ".bin", static_cast<size_t>((2 + p.dom.n) * N));
  p.u = ArrayXcd::Zero(N);
  for (std::int64_t i = 0; i < N; ++i) p.u[i] = Complex(payload[2 * i], payload[2 * i + 1]);
  size_t off = static_cast<size_t>(2 * N);
  for (int jj = 0; jj < p.dom.n; ++jj) {
    p.a[jj] = ArrayXd::Zero(N);
    for (std::int64_t i = 0; i < N; ++i) p.a[jj][i] = payload[off++];
  }
  p.validate();
  return p;
}

std::string fnv1a_hex(const void* data, size_t count) {
  const unsigned char* bytes = static_cast<const unsigned char*>(data);
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (size_t i = 0; i < count; ++i) {
    h ^= bytes[i];
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot digest " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string s = ss.str();
  return fnv1a_hex(s.data(), s.size());
}

std::string format_real(Real v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void CsvWriter::row(Real epsilon, const std::string& grid, const std::string& quantity,
                    Real value, Real tolerance, bool pass) {
  std::ostringstream ss;
  ss << experiment_ << "," << model_ << "," << format_real(epsilon) << "," << grid << ","
     << quantity << "," << format_real(value) << "," << format_real(tolerance) << ","
     << (pass ? "1" : "0");
  rows_.push_back(ss.str());
  if (!pass) all_passed_ = false;
}

void CsvWriter::info(Real epsilon, const std::string& grid, const std::string& quantity,
                     Real value) {
  std::ostringstream ss;
  ss << experiment_ << "," << model_ << "," << format_real(epsilon) << "," << grid << ","
     << quantity << "," << format_real(value) << ",,1";
  rows_.push_back(ss.str());
}

std::string CsvWriter::str() const {
  std::ostringstream ss;
  ss << "# format_version=1\n";
  ss << "experiment,model,epsilon,grid,quantity,value,tolerance,pass\n";
  for (const auto& r : rows_) ss << r << "\n";
  return ss.str();
}

void CsvWriter::write(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << str();
}

std::string grid_label(const TorusDomain& dom) {
  std::ostringstream ss;
  ss << dom.grid[0];
  for (int a = 1; a < dom.n; ++a) ss << "x" << dom.grid[a];
  return ss.str();
}

}  // namespace ivlab
