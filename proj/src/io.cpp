#include "reidhtl/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "reidhtl/errors.hpp"

namespace reidhtl::io {

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  return out;
}

void check_cell(const std::string& cell) {
  if (cell.find_first_of(",\n\r") != std::string::npos) {
    throw Error(ErrorKind::InvalidArgument, "CSV cell contains a separator: '" + cell + "'");
  }
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw Error(ErrorKind::InvalidArgument, "cannot format double");
  return std::string(buf, ptr);
}

double parse_double(const std::string& s) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw Error(ErrorKind::ParseError, "not a number: '" + s + "'");
  }
  while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  if (pos != s.size()) throw Error(ErrorKind::ParseError, "trailing characters in '" + s + "'");
  return v;
}

void write_features(std::ostream& os, const FeatureTable& table) {
  os << "person_id,camera_id";
  for (int k = 0; k < table.dim(); ++k) os << ",f" << k;
  os << '\n';
  for (const auto& r : table.rows()) {
    check_cell(r.person_id);
    check_cell(r.camera_id);
    os << r.person_id << ',' << r.camera_id;
    for (int k = 0; k < table.dim(); ++k) os << ',' << format_double(r.feature(k));
    os << '\n';
  }
}

FeatureTable read_features(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw Error(ErrorKind::ParseError, "empty feature file");
  const auto header = split(strip_cr(line), ',');
  if (header.size() < 3 || header[0] != "person_id" || header[1] != "camera_id") {
    throw Error(ErrorKind::ParseError, "feature header must start with person_id,camera_id");
  }
  const int d = static_cast<int>(header.size()) - 2;
  for (int k = 0; k < d; ++k) {
    if (header[static_cast<std::size_t>(k) + 2] != "f" + std::to_string(k)) {
      throw Error(ErrorKind::ParseError, "feature column " + std::to_string(k) + " must be named f" +
                                             std::to_string(k));
    }
  }
  std::vector<FeatureRow> rows;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (static_cast<int>(cells.size()) != d + 2) {
      throw Error(ErrorKind::DimensionMismatch,
                  "line " + std::to_string(lineno) + " has " + std::to_string(cells.size()) +
                      " cells, expected " + std::to_string(d + 2));
    }
    FeatureRow r{cells[0], cells[1], Eigen::VectorXd(d)};
    for (int k = 0; k < d; ++k) r.feature(k) = parse_double(cells[static_cast<std::size_t>(k) + 2]);
    rows.push_back(std::move(r));
  }
  return FeatureTable(d, std::move(rows));
}

void save_features(const std::filesystem::path& path, const FeatureTable& table) {
  auto out = open_out(path);
  write_features(out, table);
}

FeatureTable load_features(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_features(in);
}

void write_metric(std::ostream& os, const Metric& m) {
  const int d = m.dim();
  os << d << '\n';
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      if (j) os << ' ';
      os << format_double(m(i, j));
    }
    os << '\n';
  }
}

Metric read_metric(std::istream& is) {
  std::string tok;
  if (!(is >> tok)) throw Error(ErrorKind::ParseError, "empty metric file");
  const double dd = parse_double(tok);
  const int d = static_cast<int>(dd);
  if (d < 1 || dd != d) throw Error(ErrorKind::ParseError, "metric dimension must be a positive integer");
  Eigen::MatrixXd m(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      if (!(is >> tok)) throw Error(ErrorKind::ParseError, "metric file truncated");
      m(i, j) = parse_double(tok);
    }
  }
  if (is >> tok) throw Error(ErrorKind::ParseError, "trailing data in metric file");
  return Metric(m);
}

void save_metric(const std::filesystem::path& path, const Metric& m) {
  auto out = open_out(path);
  write_metric(out, m);
}

Metric load_metric(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_metric(in);
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw Error(ErrorKind::ParseError, "missing CSV column '" + name + "'");
}

void write_csv(std::ostream& os, const CsvTable& t) {
  auto line = [&os](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      check_cell(cells[i]);
      if (i) os << ',';
      os << cells[i];
    }
    os << '\n';
  };
  line(t.header);
  for (const auto& r : t.rows) {
    if (r.size() != t.header.size()) throw Error(ErrorKind::InvalidArgument, "ragged CSV row");
    line(r);
  }
  for (const auto& c : t.comments) os << "# " << c << '\n';
}

CsvTable read_csv(std::istream& is) {
  CsvTable t;
  std::string line;
  bool have_header = false;
  while (std::getline(is, line)) {
    line = strip_cr(line);
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::string c = line.substr(1);
      if (!c.empty() && c[0] == ' ') c.erase(0, 1);
      t.comments.push_back(c);
      continue;
    }
    auto cells = split(line, ',');
    if (!have_header) {
      t.header = std::move(cells);
      have_header = true;
    } else {
      if (cells.size() != t.header.size()) throw Error(ErrorKind::ParseError, "ragged CSV row: " + line);
      t.rows.push_back(std::move(cells));
    }
  }
  if (!have_header) throw Error(ErrorKind::ParseError, "CSV has no header");
  return t;
}

void save_csv(const std::filesystem::path& path, const CsvTable& t) {
  auto out = open_out(path);
  write_csv(out, t);
}

CsvTable load_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_csv(in);
}

void save_weights(const std::filesystem::path& path, const std::vector<std::string>& source_names,
                  const WeightVector& w) {
  if (static_cast<int>(source_names.size()) != w.size()) {
    throw Error(ErrorKind::DimensionMismatch, "one name per weight required");
  }
  CsvTable t{{"source", "weight"}, {}, {}};
  for (int i = 0; i < w.size(); ++i) t.rows.push_back({source_names[static_cast<std::size_t>(i)], format_double(w[i])});
  save_csv(path, t);
}

std::pair<std::vector<std::string>, WeightVector> load_weights(const std::filesystem::path& path) {
  const auto t = load_csv(path);
  const auto cs = t.column("source");
  const auto cw = t.column("weight");
  std::vector<std::string> names;
  Eigen::VectorXd w(static_cast<Eigen::Index>(t.rows.size()));
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    names.push_back(t.rows[i][cs]);
    w(static_cast<Eigen::Index>(i)) = parse_double(t.rows[i][cw]);
  }
  return {names, WeightVector(w)};
}

void save_trace(const std::filesystem::path& path,
                const std::vector<std::pair<int, double>>& trace) {
  CsvTable t{{"iteration", "objective"}, {}, {}};
  for (const auto& [it, f] : trace) t.rows.push_back({std::to_string(it), format_double(f)});
  save_csv(path, t);
}

std::vector<std::pair<int, double>> load_trace(const std::filesystem::path& path) {
  const auto t = load_csv(path);
  const auto ci = t.column("iteration");
  const auto cf = t.column("objective");
  std::vector<std::pair<int, double>> out;
  for (const auto& r : t.rows) out.emplace_back(std::stoi(r[ci]), parse_double(r[cf]));
  return out;
}

}  // namespace reidhtl::io
