#include "losstomo/topology.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "losstomo/error.hpp"

namespace losstomo {

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

template <typename T>
bool parse_number(std::string_view token, T& value) {
  const char* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, value);
  return ec == std::errc{} && ptr == end;
}

}  // namespace

Tree Tree::from_links(std::vector<Link> links) {
  if (links.empty()) throw InputError("topology has no links");

  const std::size_t m = links.size();
  Tree t;
  t.parent_.assign(m + 1, kRoot);
  t.rate_.assign(m + 1, 1.0);
  t.children_.resize(m + 1);

  std::vector<bool> seen(m + 1, false);
  for (const Link& link : links) {
    if (link.child == kRoot) throw InputError("node 0 cannot appear as a child");
    if (link.child > m)
      throw InputError("node ids not contiguous from 0: child " + std::to_string(link.child) +
                       " but only " + std::to_string(m) + " links");
    if (seen[link.child]) throw InputError("duplicate child id " + std::to_string(link.child));
    seen[link.child] = true;
    if (link.parent >= link.child)
      throw InputError("parent " + std::to_string(link.parent) + " of node " +
                       std::to_string(link.child) + " must have a smaller id");
    if (!(link.rate > 0.0 && link.rate <= 1.0))
      throw InputError("rate of link " + std::to_string(link.child) + " must lie in (0, 1]");
    t.parent_[link.child] = link.parent;
    t.rate_[link.child] = link.rate;
  }
  // With m distinct children in 1..m every id is present, so contiguity holds.

  for (NodeId k = 1; k <= m; ++k) t.children_[t.parent_[k]].push_back(k);

  if (t.children_[kRoot].size() != 1)
    throw InputError("root must have exactly one child, found " +
                     std::to_string(t.children_[kRoot].size()));
  for (NodeId k = 1; k <= m; ++k) {
    if (t.children_[k].size() == 1)
      throw InputError("internal node " + std::to_string(k) +
                       " has a single child; its links cannot be told apart");
  }

  t.receivers_of_.resize(m + 1);
  for (NodeId k = static_cast<NodeId>(m); k >= 1; --k) {
    if (t.children_[k].empty()) {
      t.receivers_of_[k] = {k};
      continue;
    }
    for (NodeId c : t.children_[k])
      t.receivers_of_[k].insert(t.receivers_of_[k].end(), t.receivers_of_[c].begin(),
                                t.receivers_of_[c].end());
    std::sort(t.receivers_of_[k].begin(), t.receivers_of_[k].end());
  }
  t.receivers_of_[kRoot] = t.receivers_of_[1];

  for (NodeId k = 1; k <= m; ++k) {
    if (t.children_[k].empty())
      t.receivers_.push_back(k);
    else
      t.internal_.push_back(k);
  }
  return t;
}

void Tree::check(NodeId k) const {
  if (!contains(k)) throw InputError("unknown node id " + std::to_string(k));
}

bool Tree::is_leaf(NodeId k) const {
  check(k);
  return k != kRoot && children_[k].empty();
}

bool Tree::is_internal(NodeId k) const {
  check(k);
  return k != kRoot && !children_[k].empty();
}

NodeId Tree::parent(NodeId k) const {
  check(k);
  if (k == kRoot) throw InputError("root has no parent");
  return parent_[k];
}

std::span<const NodeId> Tree::children(NodeId k) const {
  check(k);
  return children_[k];
}

double Tree::link_rate(NodeId k) const {
  check(k);
  if (k == kRoot) throw InputError("root has no link");
  return rate_[k];
}

std::span<const NodeId> Tree::receivers_of(NodeId k) const {
  check(k);
  return receivers_of_[k];
}

double Tree::true_path_rate(NodeId k) const {
  check(k);
  double a = 1.0;
  for (NodeId i = k; i != kRoot; i = parent_[i]) a *= rate_[i];
  return a;
}

Tree parse_topology(std::string_view text) {
  std::vector<Link> links;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    auto tokens = split_ws(line);
    if (tokens.empty() || tokens.front().starts_with('#')) continue;
    if (tokens.size() != 4 || tokens[0] != "link")
      throw ParseError(line_no, "expected 'link <child> <parent> <rate>'");

    Link link;
    if (!parse_number(tokens[1], link.child)) throw ParseError(line_no, "bad child id");
    if (!parse_number(tokens[2], link.parent)) throw ParseError(line_no, "bad parent id");
    if (!parse_number(tokens[3], link.rate)) throw ParseError(line_no, "bad rate");
    if (!(link.rate > 0.0 && link.rate <= 1.0)) throw ParseError(line_no, "rate must lie in (0, 1]");
    if (!links.empty() && link.child <= links.back().child)
      throw ParseError(line_no, "child ids must appear in ascending order");
    links.push_back(link);
  }
  return Tree::from_links(std::move(links));
}

Tree load_topology(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open topology file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_topology(buf.str());
}

std::string format_topology(const Tree& tree) {
  std::string out;
  char buf[96];
  for (NodeId k = 1; k < tree.node_count(); ++k) {
    std::snprintf(buf, sizeof buf, "link %u %u %.17g\n", k, tree.parent(k), tree.link_rate(k));
    out += buf;
  }
  return out;
}

}  // namespace losstomo
