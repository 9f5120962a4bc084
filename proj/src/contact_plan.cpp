#include "dtnlab/contact_plan.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <random>
#include <set>

#include <fmt/format.h>

namespace dtnlab {

namespace {

constexpr double kGridTolerance = 1e-9;

bool contact_order(const Contact& a, const Contact& b) {
  if (a.start != b.start) return a.start < b.start;
  return value(a.id) < value(b.id);
}

}  // namespace

std::optional<int> StateGrid::index_of(double t) const {
  const double q = t / state_duration;
  const double rounded = std::round(q);
  if (std::abs(q - rounded) > kGridTolerance * std::max(1.0, std::abs(q))) return std::nullopt;
  return static_cast<int>(rounded);
}

int StateGrid::ceil_index(double t) const {
  const double q = t / state_duration;
  const double rounded = std::round(q);
  if (std::abs(q - rounded) <= kGridTolerance * std::max(1.0, std::abs(q))) return static_cast<int>(rounded);
  return static_cast<int>(std::ceil(q));
}

int StateGrid::floor_index(double t) const {
  const double q = t / state_duration;
  const double rounded = std::round(q);
  if (std::abs(q - rounded) <= kGridTolerance * std::max(1.0, std::abs(q))) return static_cast<int>(rounded);
  return static_cast<int>(std::floor(q));
}

bool ContactPlan::has_node(NodeId id) const {
  return std::any_of(nodes.begin(), nodes.end(), [id](const NodeSpec& n) { return n.id == id; });
}

const NodeSpec& ContactPlan::node(NodeId id) const {
  for (const auto& n : nodes) {
    if (n.id == id) return n;
  }
  throw Error(fmt::format("unknown node {}", value(id)));
}

std::optional<std::size_t> ContactPlan::find_contact(ContactId id) const {
  for (std::size_t i = 0; i < contacts.size(); ++i) {
    if (contacts[i].id == id) return i;
  }
  return std::nullopt;
}

const Contact& ContactPlan::contact(ContactId id) const {
  if (auto i = find_contact(id)) return contacts[*i];
  throw Error(fmt::format("unknown contact {}", value(id)));
}

GridContact ContactPlan::grid_contact(const Contact& c) const {
  return {grid.ceil_index(c.start), grid.floor_index(c.end)};
}

std::int64_t ContactPlan::volume(const Contact& c) const {
  return c.capacity * std::max(0, grid_contact(c).state_span());
}

void ContactPlan::normalize() {
  std::sort(nodes.begin(), nodes.end(),
            [](const NodeSpec& a, const NodeSpec& b) { return value(a.id) < value(b.id); });
  std::sort(contacts.begin(), contacts.end(), contact_order);
}

std::vector<Diagnostic> validate(const ContactPlan& plan) {
  std::vector<Diagnostic> out;
  auto report = [&out](std::string code, std::string message) {
    out.push_back({std::move(code), std::move(message)});
  };

  const bool grid_ok = plan.grid.state_count >= 1 && plan.grid.state_duration > 0 &&
                       std::isfinite(plan.grid.state_duration);
  if (!grid_ok) {
    report("invalid grid", fmt::format("state grid {} x {} s is not valid", plan.grid.state_count,
                                       plan.grid.state_duration));
  }

  std::set<std::int32_t> node_ids;
  for (const auto& n : plan.nodes) {
    if (value(n.id) <= 0) report("invalid node id", fmt::format("node {}: id must be positive", value(n.id)));
    if (!node_ids.insert(value(n.id)).second) {
      report("duplicate node", fmt::format("node {} declared more than once", value(n.id)));
    }
    if (n.buffer_capacity && *n.buffer_capacity < 0) {
      report("negative buffer", fmt::format("node {}: buffer capacity {} < 0", value(n.id), *n.buffer_capacity));
    }
  }
  if (!std::is_sorted(plan.nodes.begin(), plan.nodes.end(),
                      [](const NodeSpec& a, const NodeSpec& b) { return value(a.id) < value(b.id); })) {
    report("unsorted nodes", "nodes are not sorted by id");
  }

  std::set<std::int32_t> contact_ids;
  for (const auto& c : plan.contacts) {
    const auto cid = value(c.id);
    if (!contact_ids.insert(cid).second) {
      report("duplicate contact id", fmt::format("contact {} declared more than once", cid));
    }
    if (!(c.start < c.end)) {
      report("empty contact window", fmt::format("contact {}: end {} <= start {}", cid, c.end, c.start));
    }
    for (NodeId endpoint : {c.from, c.to}) {
      if (!node_ids.contains(value(endpoint))) {
        report("unknown node", fmt::format("contact {} references undeclared node {}", cid, value(endpoint)));
      }
    }
    if (c.from == c.to) report("self contact", fmt::format("contact {}: from == to", cid));
    if (c.capacity < 0) report("negative capacity", fmt::format("contact {}: capacity {} < 0", cid, c.capacity));
    if (grid_ok) {
      const auto s = plan.grid.index_of(c.start);
      const auto e = plan.grid.index_of(c.end);
      if (!s || !e) {
        report("off-grid timestamp", fmt::format("contact {}: [{}, {}] is not state-aligned", cid, c.start, c.end));
      } else if (*s < 0 || *e > plan.grid.state_count) {
        report("outside horizon", fmt::format("contact {}: [{}, {}] exceeds [0, {}]", cid, c.start, c.end,
                                              plan.grid.horizon()));
      }
    }
  }
  if (!std::is_sorted(plan.contacts.begin(), plan.contacts.end(), contact_order)) {
    report("unsorted contacts", "contacts are not sorted by (start, id)");
  }
  return out;
}

namespace {

struct Token {
  std::string_view text;
  int column;
};

std::vector<Token> tokenize(std::string_view line) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    if (line[i] == '#') break;
    if (line[i] == ' ' || line[i] == '\t' || line[i] == '\r') {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r' && line[j] != '#') ++j;
    out.push_back({line.substr(i, j - i), static_cast<int>(i) + 1});
    i = j;
  }
  return out;
}

class LineParser {
 public:
  LineParser(const std::vector<Token>& tokens, int line) : tokens_(tokens), line_(line) {}

  void expect_count(std::size_t n) const {
    if (tokens_.size() < n) {
      throw PlanError(fmt::format("line {}: '{}' record needs {} fields, got {}", line_, tokens_[0].text, n - 1,
                                  tokens_.size() - 1),
                      line_, 0);
    }
    if (tokens_.size() > n) {
      const auto& extra = tokens_[n];
      throw PlanError(fmt::format("line {}:{}: unexpected token '{}'", line_, extra.column, extra.text), line_,
                      extra.column);
    }
  }

  std::int64_t integer(std::size_t i) const {
    const auto& tok = tokens_[i];
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(tok.text.data(), tok.text.data() + tok.text.size(), v);
    if (ec != std::errc() || ptr != tok.text.data() + tok.text.size()) fail(i, "integer");
    return v;
  }

  double real(std::size_t i) const {
    const auto& tok = tokens_[i];
    double v = 0;
    auto [ptr, ec] = std::from_chars(tok.text.data(), tok.text.data() + tok.text.size(), v);
    if (ec != std::errc() || ptr != tok.text.data() + tok.text.size() || !std::isfinite(v)) fail(i, "number");
    return v;
  }

  std::string_view text(std::size_t i) const { return tokens_[i].text; }
  int column(std::size_t i) const { return tokens_[i].column; }

  [[noreturn]] void fail(std::size_t i, std::string_view expected) const {
    const auto& tok = tokens_[i];
    throw PlanError(fmt::format("line {}:{}: expected {}, got '{}'", line_, tok.column, expected, tok.text), line_,
                    tok.column);
  }

 private:
  const std::vector<Token>& tokens_;
  int line_;
};

}  // namespace

ContactPlan parse_contact_plan(std::string_view text) {
  ContactPlan plan;
  bool have_header = false;
  std::vector<int> contact_lines;

  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    const std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;

    const auto tokens = tokenize(line);
    if (tokens.empty()) continue;
    LineParser p(tokens, line_no);
    const auto keyword = tokens[0].text;

    if (keyword == "plan") {
      if (have_header) throw PlanError(fmt::format("line {}: duplicate plan header", line_no), line_no, 1);
      p.expect_count(3);
      const auto count = p.integer(1);
      const double duration = p.real(2);
      if (count < 1) throw PlanError(fmt::format("line {}:{}: state count must be >= 1", line_no, p.column(1)), line_no, p.column(1));
      if (duration <= 0) throw PlanError(fmt::format("line {}:{}: state duration must be > 0", line_no, p.column(2)), line_no, p.column(2));
      plan.grid = {static_cast<int>(count), duration};
      have_header = true;
      continue;
    }
    if (!have_header) {
      throw PlanError(fmt::format("line {}: '{}' before plan header", line_no, keyword), line_no, 1);
    }
    if (keyword == "node") {
      p.expect_count(3);
      NodeSpec n;
      const auto id = p.integer(1);
      if (id <= 0) throw PlanError(fmt::format("line {}:{}: node id must be positive", line_no, p.column(1)), line_no, p.column(1));
      n.id = NodeId{static_cast<std::int32_t>(id)};
      if (p.text(2) != "inf") {
        n.buffer_capacity = p.integer(2);
        if (*n.buffer_capacity < 0) throw PlanError(fmt::format("line {}:{}: buffer capacity must be >= 0", line_no, p.column(2)), line_no, p.column(2));
      }
      if (plan.has_node(n.id)) throw PlanError(fmt::format("line {}: duplicate node {}", line_no, id), line_no, p.column(1));
      plan.nodes.push_back(n);
    } else if (keyword == "contact") {
      p.expect_count(7);
      Contact c;
      c.id = ContactId{static_cast<std::int32_t>(p.integer(1))};
      c.from = NodeId{static_cast<std::int32_t>(p.integer(2))};
      c.to = NodeId{static_cast<std::int32_t>(p.integer(3))};
      c.start = p.real(4);
      c.end = p.real(5);
      c.capacity = p.integer(6);
      if (!(c.start < c.end)) throw PlanError(fmt::format("line {}: empty contact window [{}, {}]", line_no, c.start, c.end), line_no, p.column(5));
      if (!plan.grid.index_of(c.start)) throw PlanError(fmt::format("line {}:{}: off-grid timestamp {}", line_no, p.column(4), c.start), line_no, p.column(4));
      if (!plan.grid.index_of(c.end)) throw PlanError(fmt::format("line {}:{}: off-grid timestamp {}", line_no, p.column(5), c.end), line_no, p.column(5));
      if (c.capacity < 0) throw PlanError(fmt::format("line {}:{}: capacity must be >= 0", line_no, p.column(6)), line_no, p.column(6));
      plan.contacts.push_back(c);
      contact_lines.push_back(line_no);
    } else {
      throw PlanError(fmt::format("line {}:1: unknown record '{}'", line_no, keyword), line_no, 1);
    }
  }
  if (!have_header) throw PlanError("missing plan header", 0, 0);

  // Cross-record checks, reported at the offending contact's line.
  std::set<std::int32_t> seen;
  for (std::size_t i = 0; i < plan.contacts.size(); ++i) {
    const auto& c = plan.contacts[i];
    const int line = contact_lines[i];
    if (!seen.insert(value(c.id)).second) throw PlanError(fmt::format("line {}: duplicate contact id {}", line, value(c.id)), line, 0);
    for (NodeId endpoint : {c.from, c.to}) {
      if (!plan.has_node(endpoint)) throw PlanError(fmt::format("line {}: unknown node {}", line, value(endpoint)), line, 0);
    }
    if (c.from == c.to) throw PlanError(fmt::format("line {}: contact {} has from == to", line, value(c.id)), line, 0);
  }

  plan.normalize();
  if (auto diags = validate(plan); !diags.empty()) {
    throw PlanError(diags.front().code + ": " + diags.front().message, 0, 0);
  }
  return plan;
}

std::string serialize_contact_plan(const ContactPlan& plan) {
  ContactPlan sorted = plan;
  sorted.normalize();
  std::string out = fmt::format("plan {} {}\n", sorted.grid.state_count, sorted.grid.state_duration);
  for (const auto& n : sorted.nodes) {
    if (n.buffer_capacity) {
      out += fmt::format("node {} {}\n", value(n.id), *n.buffer_capacity);
    } else {
      out += fmt::format("node {} inf\n", value(n.id));
    }
  }
  for (const auto& c : sorted.contacts) {
    out += fmt::format("contact {} {} {} {} {} {}\n", value(c.id), value(c.from), value(c.to), c.start, c.end,
                       c.capacity);
  }
  return out;
}

ContactPlan generate_random_topology(const TopologyConfig& cfg) {
  if (cfg.node_count < 1) throw Error("topology needs at least one node");
  if (!(cfg.density >= 0.0 && cfg.density <= 1.0)) throw Error(fmt::format("density {} outside [0, 1]", cfg.density));
  if (cfg.capacity < 0) throw Error("contact capacity must be >= 0");
  if (cfg.grid.state_count < 1 || !(cfg.grid.state_duration > 0)) throw Error("invalid state grid");

  ContactPlan plan;
  plan.grid = cfg.grid;
  for (int i = 1; i <= cfg.node_count; ++i) plan.nodes.push_back({NodeId{i}, std::nullopt});

  std::mt19937_64 rng(cfg.seed);
  auto uniform = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };

  std::int32_t next_id = 1;
  for (int q = 1; q <= cfg.grid.state_count; ++q) {
    const double start = cfg.grid.timestamp(q - 1);
    const double end = cfg.grid.timestamp(q);
    for (int a = 1; a <= cfg.node_count; ++a) {
      for (int b = a + 1; b <= cfg.node_count; ++b) {
        if (!(uniform() < cfg.density)) continue;
        plan.contacts.push_back({ContactId{next_id++}, NodeId{a}, NodeId{b}, start, end, cfg.capacity});
        plan.contacts.push_back({ContactId{next_id++}, NodeId{b}, NodeId{a}, start, end, cfg.capacity});
      }
    }
  }
  plan.normalize();
  return plan;
}

}  // namespace dtnlab
