#include "bagged_eb/dataset.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace beb {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(std::string_view(line).substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

[[noreturn]] void fail_at(std::size_t line_no, const std::string& what) {
  throw InputError("line " + std::to_string(line_no) + ": " + what);
}

double parse_real(const std::string& field, std::size_t line_no, const char* column) {
  double v = 0.0;
  const auto* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, v);
  if (ec != std::errc() || ptr != end || field.empty())
    fail_at(line_no, std::string("column '") + column + "': not a number: '" + field + "'");
  if (!std::isfinite(v)) fail_at(line_no, std::string("column '") + column + "' is not finite");
  return v;
}

std::int64_t parse_count(const std::string& field, std::size_t line_no) {
  std::int64_t v = 0;
  const auto* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, v);
  if (ec != std::errc() || ptr != end || field.empty())
    fail_at(line_no, "column 'z': not a nonnegative integer: '" + field + "'");
  if (v < 0) fail_at(line_no, "column 'z': negative count " + field);
  return v;
}

struct RawTable {
  std::vector<std::string> header;
  std::vector<std::pair<std::size_t, std::vector<std::string>>> rows;  // (line number, fields)
};

RawTable read_table(std::istream& in) {
  RawTable t;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_fields(line);
    if (t.header.empty()) {
      t.header = std::move(fields);
      continue;
    }
    if (fields.size() != t.header.size())
      fail_at(line_no, "expected " + std::to_string(t.header.size()) + " fields, got " +
                           std::to_string(fields.size()));
    t.rows.emplace_back(line_no, std::move(fields));
  }
  if (t.header.empty()) throw InputError("empty CSV: header line required");
  return t;
}

void require_header(const RawTable& t, const char* second, const char* third) {
  if (t.header.size() < 3 || t.header[0] != "id" || t.header[1] != second || t.header[2] != third)
    throw InputError(std::string("line 1: header must start with 'id,") + second + "," + third +
                     "'");
}

template <class Area>
Dataset<Area> build(std::vector<Area> areas) {
  try {
    return Dataset<Area>(std::move(areas));
  } catch (const InputError& e) {
    throw InputError(std::string("invalid dataset: ") + e.what());
  }
}

void write_header(std::ostream& out, const char* second, const char* third, std::size_t p,
                  std::span<const std::string> names) {
  out << "id," << second << ',' << third;
  for (std::size_t j = 1; j < p; ++j) {
    out << ',';
    if (names.size() == p - 1)
      out << names[j - 1];
    else
      out << 'x' << j;
  }
  out << '\n';
}

}  // namespace

bool operator==(const GaussianArea& a, const GaussianArea& b) {
  return a.id == b.id && a.y == b.y && a.D == b.D && a.x == b.x;
}

bool operator==(const CountArea& a, const CountArea& b) {
  return a.id == b.id && a.z == b.z && a.n == b.n && a.x == b.x;
}

void validate_area(const GaussianArea& a) {
  if (!std::isfinite(a.y)) throw InputError("area '" + a.id + "': y is not finite");
  if (!(a.D > 0.0) || !std::isfinite(a.D))
    throw InputError("area '" + a.id + "': sampling variance D must be positive and finite");
  for (double v : a.x)
    if (!std::isfinite(v)) throw InputError("area '" + a.id + "': covariate is not finite");
}

void validate_area(const CountArea& a) {
  if (a.z < 0) throw InputError("area '" + a.id + "': count z must be nonnegative");
  if (!(a.n > 0.0) || !std::isfinite(a.n))
    throw InputError("area '" + a.id + "': exposure n must be positive and finite");
  for (double v : a.x)
    if (!std::isfinite(v)) throw InputError("area '" + a.id + "': covariate is not finite");
}

DatasetKind detect_kind(std::istream& in) {
  std::string line;
  while (std::getline(in, line))
    if (!trim(line).empty()) break;
  const auto f = split_fields(line);
  if (f.size() >= 3 && f[0] == "id" && f[1] == "y" && f[2] == "D") return DatasetKind::Gaussian;
  if (f.size() >= 3 && f[0] == "id" && f[1] == "z" && f[2] == "n") return DatasetKind::Count;
  throw InputError("line 1: unrecognized header '" + trim(line) +
                   "' (expected 'id,y,D,...' or 'id,z,n,...')");
}

GaussianDataset read_gaussian_csv(std::istream& in, std::vector<std::string>* covariate_names) {
  const auto t = read_table(in);
  require_header(t, "y", "D");
  if (covariate_names) covariate_names->assign(t.header.begin() + 3, t.header.end());
  std::vector<GaussianArea> areas;
  for (const auto& [line_no, f] : t.rows) {
    GaussianArea a;
    a.id = f[0];
    a.y = parse_real(f[1], line_no, "y");
    a.D = parse_real(f[2], line_no, "D");
    if (!(a.D > 0.0)) fail_at(line_no, "column 'D': sampling variance must be positive");
    for (std::size_t j = 3; j < f.size(); ++j)
      a.x.push_back(parse_real(f[j], line_no, t.header[j].c_str()));
    areas.push_back(std::move(a));
  }
  return build(std::move(areas));
}

CountDataset read_count_csv(std::istream& in, std::vector<std::string>* covariate_names) {
  const auto t = read_table(in);
  require_header(t, "z", "n");
  if (covariate_names) covariate_names->assign(t.header.begin() + 3, t.header.end());
  std::vector<CountArea> areas;
  for (const auto& [line_no, f] : t.rows) {
    CountArea a;
    a.id = f[0];
    a.z = parse_count(f[1], line_no);
    a.n = parse_real(f[2], line_no, "n");
    if (!(a.n > 0.0)) fail_at(line_no, "column 'n': exposure must be positive");
    for (std::size_t j = 3; j < f.size(); ++j)
      a.x.push_back(parse_real(f[j], line_no, t.header[j].c_str()));
    areas.push_back(std::move(a));
  }
  return build(std::move(areas));
}

namespace {
std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  return in;
}
}  // namespace

GaussianDataset load_gaussian_csv(const std::filesystem::path& path,
                                  std::vector<std::string>* covariate_names) {
  auto in = open_input(path);
  return read_gaussian_csv(in, covariate_names);
}

CountDataset load_count_csv(const std::filesystem::path& path,
                            std::vector<std::string>* covariate_names) {
  auto in = open_input(path);
  return read_count_csv(in, covariate_names);
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) return "nan";
  return std::string(buf, ptr);
}

void write_csv(std::ostream& out, const GaussianDataset& data,
               std::span<const std::string> covariate_names) {
  write_header(out, "y", "D", data.dim(), covariate_names);
  for (const auto& a : data) {
    out << a.id << ',' << format_double(a.y) << ',' << format_double(a.D);
    for (std::size_t j = 1; j < a.x.size(); ++j) out << ',' << format_double(a.x[j]);
    out << '\n';
  }
}

void write_csv(std::ostream& out, const CountDataset& data,
               std::span<const std::string> covariate_names) {
  write_header(out, "z", "n", data.dim(), covariate_names);
  for (const auto& a : data) {
    out << a.id << ',' << a.z << ',' << format_double(a.n);
    for (std::size_t j = 1; j < a.x.size(); ++j) out << ',' << format_double(a.x[j]);
    out << '\n';
  }
}

}  // namespace beb
