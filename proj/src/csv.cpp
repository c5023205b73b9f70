#include "losstomo/csv.hpp"

#include <charconv>
#include <cstdio>
#include <istream>
#include <ostream>

#include "losstomo/error.hpp"
#include "losstomo/simulator.hpp"

namespace losstomo {

std::string format_real(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", value);
  return buf;
}

std::string format_real(const std::optional<double>& value) {
  return value ? format_real(*value) : std::string{};
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = text.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(text.substr(start));
      return out;
    }
    out.push_back(text.substr(start, pos - start));
    start = pos + 1;
  }
}

void write_observation_csv(std::ostream& out, const ObservationMatrix& obs,
                           const ObservationMeta& meta) {
  out << "# ";
  if (meta.seed) out << "seed=" << *meta.seed << ' ';
  out << "n=" << obs.probe_count() << " rng=splitmix64";
  if (!meta.topology.empty()) out << " topology=" << meta.topology;
  out << '\n';

  out << "probe";
  for (NodeId id : obs.receiver_ids()) out << ',' << id;
  out << '\n';

  const std::size_t cols = obs.receiver_ids().size();
  std::string row;
  for (std::size_t j = 0; j < obs.probe_count(); ++j) {
    row = std::to_string(j + 1);
    for (std::size_t c = 0; c < cols; ++c) {
      row += ',';
      row += obs.column(c).test(j) ? '1' : '0';
    }
    row += '\n';
    out << row;
  }
}

ObservationMatrix read_observation_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<NodeId> ids;
  bool have_header = false;
  std::vector<std::vector<bool>> rows;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    auto fields = split(line, ',');
    if (!have_header) {
      if (fields.front() != "probe") throw ParseError(line_no, "header must start with 'probe'");
      for (std::size_t i = 1; i < fields.size(); ++i) {
        NodeId id = 0;
        auto f = fields[i];
        auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), id);
        if (ec != std::errc{} || ptr != f.data() + f.size() || f.empty())
          throw ParseError(line_no, "bad receiver id '" + std::string(f) + "'");
        if (!ids.empty() && id <= ids.back())
          throw ParseError(line_no, "receiver ids must be strictly ascending");
        ids.push_back(id);
      }
      if (ids.empty()) throw ParseError(line_no, "no receiver columns");
      have_header = true;
      continue;
    }
    if (fields.size() != ids.size() + 1)
      throw ParseError(line_no, "expected " + std::to_string(ids.size() + 1) + " fields");
    if (fields[0] != std::to_string(rows.size() + 1))
      throw ParseError(line_no, "probe index must be " + std::to_string(rows.size() + 1));
    std::vector<bool> row(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (fields[i + 1] == "1")
        row[i] = true;
      else if (fields[i + 1] != "0")
        throw ParseError(line_no, "outcome must be 0 or 1");
    }
    rows.push_back(std::move(row));
  }
  if (!have_header) throw InputError("observation file has no header");
  if (rows.empty()) throw InputError("observation file has no probes");

  ObservationMatrix obs(rows.size(), std::move(ids));
  for (std::size_t j = 0; j < rows.size(); ++j)
    for (std::size_t c = 0; c < rows[j].size(); ++c)
      if (rows[j][c]) obs.column(c).set(j);
  return obs;
}

}  // namespace losstomo
