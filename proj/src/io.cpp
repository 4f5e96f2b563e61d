#include "oblab/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace oblab {

std::string format_g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << content;
}

void write_snapshot(const ScalarField& f, const std::string& path) {
  const Grid& g = *f.grid;
  const ProblemParams& p = g.params();
  std::ostringstream out;
  out << "# obstacle-lab field snapshot v1\n";
  nlohmann::json hdr = {{"n", p.n}, {"s", p.s}, {"a", p.a}, {"h", p.h}, {"R_dom", p.R_dom}};
  out << "# " << hdr.dump() << "\n";
  out << (p.n == 2 ? "# index,x0,x1,value\n" : "# index,x0,x1,x2,value\n");
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Point q = g.point(i);
    out << i << ',' << format_g17(q[0]) << ',' << format_g17(q[1]);
    if (p.n == 3) out << ',' << format_g17(q[2]);
    out << ',' << format_g17(f.v[i]) << '\n';
  }
  write_text_file(path, out.str());
}

LoadedField read_snapshot(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open snapshot: " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("# obstacle-lab field snapshot", 0) != 0)
    throw std::runtime_error("snapshot: bad magic line in " + path);
  if (!std::getline(in, line) || line.rfind("# ", 0) != 0)
    throw std::runtime_error("snapshot: missing header line in " + path);
  nlohmann::json hdr = nlohmann::json::parse(line.substr(2));

  LoadedField out;
  out.params.n = hdr.at("n").get<int>();
  out.params.s = hdr.at("s").get<double>();
  out.params.a = hdr.at("a").get<double>();
  out.params.h = hdr.at("h").get<double>();
  out.params.R_dom = hdr.at("R_dom").get<double>();
  out.params.validate();

  std::size_t expected = 1;
  const int nax = 2 * out.params.cells_per_radius() + 1;
  for (int d = 0; d < out.params.n; ++d) expected *= static_cast<std::size_t>(nax);
  out.values.assign(expected, 0.0);

  std::size_t seen = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream row(line);
    std::string tok;
    std::getline(row, tok, ',');
    const std::size_t idx = std::stoull(tok);
    if (idx >= expected) throw std::runtime_error("snapshot: node index out of range");
    for (int skip = 0; skip < out.params.n; ++skip) std::getline(row, tok, ',');
    std::getline(row, tok, ',');
    out.values[idx] = std::stod(tok);
    ++seen;
  }
  if (seen != expected) throw std::runtime_error("snapshot: node count mismatch in " + path);
  return out;
}

} // namespace oblab
