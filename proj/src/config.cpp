#include "kochfem/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace kochfem {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string_view unquote(std::string_view s) {
  s = trim(s);
  if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') || (s.front() == '\'' && s.back() == '\'')))
    return s.substr(1, s.size() - 2);
  return s;
}

double to_real(std::string_view key, std::string_view text) {
  text = trim(text);
  double value = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size() || !std::isfinite(value))
    throw ConfigError("config: '" + std::string(key) + "' expects a number, got '" + std::string(text) + "'");
  return value;
}

long to_integer(std::string_view key, std::string_view text) {
  text = trim(text);
  long value = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw ConfigError("config: '" + std::string(key) + "' expects an integer, got '" + std::string(text) + "'");
  return value;
}

bool to_bool(std::string_view key, std::string_view text) {
  text = trim(text);
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ConfigError("config: '" + std::string(key) + "' expects true/false");
}

Point2 to_point(std::string_view key, std::string_view text) {
  const auto comma = text.find(',');
  if (comma == std::string_view::npos)
    throw ConfigError("config: '" + std::string(key) + "' expects \"x1, x2\"");
  return {to_real(key, text.substr(0, comma)), to_real(key, text.substr(comma + 1))};
}

}  // namespace

double default_mesh_size(const DomainSpec& spec) {
  if (const auto* s = std::get_if<Snowflake>(&spec.shape)) return std::pow(3.0, -s->level) / 4.0;
  if (std::holds_alternative<CirclePolygon>(spec.shape)) return 0.25;
  return 0.125;
}

void RunConfig::set(std::string_view key, std::string_view raw) {
  const std::string_view value = unquote(raw);
  if (key == "domain.kind") {
    const Point2 center = domain.center;
    if (value == "snowflake") {
      if (!std::holds_alternative<Snowflake>(domain.shape)) domain.shape = Snowflake{};
    } else if (value == "circle") {
      if (!std::holds_alternative<CirclePolygon>(domain.shape)) domain.shape = CirclePolygon{};
    } else if (value == "square") {
      domain = DomainSpec::unit_square();
      return;
    } else {
      throw ConfigError("config: domain.kind must be snowflake, circle or square");
    }
    domain.center = center;
  } else if (key == "domain.level") {
    const long n = to_integer(key, value);
    if (auto* s = std::get_if<Snowflake>(&domain.shape)) {
      s->level = static_cast<int>(n);
    } else {
      throw ConfigError("config: domain.level applies to snowflake domains only");
    }
  } else if (key == "domain.radius") {
    if (auto* c = std::get_if<CirclePolygon>(&domain.shape)) {
      c->radius = to_real(key, value);
    } else {
      throw ConfigError("config: domain.radius applies to circle domains only");
    }
  } else if (key == "domain.segments") {
    if (auto* c = std::get_if<CirclePolygon>(&domain.shape)) {
      c->segments = static_cast<int>(to_integer(key, value));
    } else {
      throw ConfigError("config: domain.segments applies to circle domains only");
    }
  } else if (key == "domain.center") {
    domain.center = to_point(key, value);
  } else if (key == "grading.h") {
    grading.h = to_real(key, value);
    h_given = true;
  } else if (key == "grading.eta") {
    grading.eta = to_real(key, value);
  } else if (key == "grading.sigma") {
    grading.sigma = to_real(key, value);
  } else if (key == "grading.R") {
    grading.cutoff = to_real(key, value);
  } else if (key == "grading.graded") {
    grading.graded = to_bool(key, value);
  } else if (key == "source.amplitude") {
    source_amplitude = to_real(key, value);
  } else if (key == "source.width") {
    source_width = to_real(key, value);
  } else if (key == "source.center") {
    source_center = to_point(key, value);
  } else if (key == "physics.mu") {
    mu = to_real(key, value);
  } else if (key == "solver.tol") {
    solver.tolerance = to_real(key, value);
  } else if (key == "solver.max_iter") {
    solver.max_iterations = to_integer(key, value);
  } else if (key == "output.dir") {
    out_dir = std::string(value);
  } else if (key == "output.formats") {
    write_csv = write_vtk = false;
    std::string_view rest = value;
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      const std::string_view item = trim(rest.substr(0, comma));
      if (item == "csv") {
        write_csv = true;
      } else if (item == "vtk") {
        write_vtk = true;
      } else if (!item.empty()) {
        throw ConfigError("config: unknown output format '" + std::string(item) + "'");
      }
      rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    }
  } else {
    throw ConfigError("config: unknown key '" + std::string(key) + "'");
  }
}

void RunConfig::validate() const {
  try {
    domain.validate();
    effective_grading().validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (!(mu > 0.0)) throw ConfigError("config: physics.mu must be positive");
  if (!(source_width >= 0.0)) throw ConfigError("config: source.width must be nonnegative");
  if (!(solver.tolerance > 0.0 && solver.tolerance < 1.0)) throw ConfigError("config: solver.tol must lie in (0, 1)");
  if (solver.max_iterations < 0) throw ConfigError("config: solver.max_iter must be nonnegative");
  if (out_dir.empty()) throw ConfigError("config: output.dir must not be empty");
}

GradingParams RunConfig::effective_grading() const {
  GradingParams g = grading;
  if (!h_given) g.h = default_mesh_size(domain);
  return g;
}

SourceField RunConfig::source() const {
  return SourceField::gaussian(source_amplitude, source_width, source_center.value_or(domain.center));
}

int RunConfig::level() const {
  if (const auto* s = std::get_if<Snowflake>(&domain.shape)) return s->level;
  return 0;
}

RunConfig parse_config(std::string_view text) {
  RunConfig cfg;
  std::string section;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("config line " + std::to_string(line_no) + ": bad section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    std::string key(trim(line.substr(0, eq)));
    if (!section.empty()) key = section + "." + key;
    cfg.set(key, line.substr(eq + 1));
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

}  // namespace kochfem
