#include "coop/io.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace coop {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string csv_preamble(const OutputMeta& meta) {
  std::ostringstream out;
  out << "# version=" << meta.version << "\n";
  out << "# config_hash=" << meta.config_hash << "\n";
  out << "# seed=" << meta.seed << "\n";
  std::istringstream lines(meta.config_text);
  for (std::string line; std::getline(lines, line);) {
    if (!line.empty()) out << "# config: " << line << "\n";
  }
  return out.str();
}

}  // namespace coop

namespace coop {

namespace {

void write_json(std::ostringstream& out, const nlohmann::ordered_json& j, int depth) {
  const std::string pad(2 * (depth + 1), ' ');
  const std::string close(2 * depth, ' ');
  switch (j.type()) {
    case nlohmann::json::value_t::object: {
      if (j.empty()) {
        out << "{}";
        return;
      }
      out << "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out << ",\n";
        first = false;
        out << pad << nlohmann::json(it.key()).dump() << ": ";
        write_json(out, it.value(), depth + 1);
      }
      out << '\n' << close << '}';
      return;
    }
    case nlohmann::json::value_t::array: {
      if (j.empty()) {
        out << "[]";
        return;
      }
      out << "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out << ",\n";
        out << pad;
        write_json(out, j[i], depth + 1);
      }
      out << '\n' << close << ']';
      return;
    }
    case nlohmann::json::value_t::number_float: {
      const double v = j.get<double>();
      if (std::isfinite(v))
        out << fmt17(v);
      else
        out << "null";
      return;
    }
    default:
      out << j.dump();
  }
}

}  // namespace

std::string dump_json(const nlohmann::ordered_json& j) {
  std::ostringstream out;
  write_json(out, j, 0);
  out << '\n';
  return out.str();
}

nlohmann::ordered_json meta_json(const OutputMeta& meta) {
  nlohmann::ordered_json m;
  m["version"] = meta.version;
  m["config_hash"] = meta.config_hash;
  m["seed"] = meta.seed;
  m["config"] = meta.config_text;
  return m;
}

}  // namespace coop
