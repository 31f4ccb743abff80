#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdint>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "grid.hpp"
#include "search.hpp"

namespace tracegrid {

using EncodedSequence = std::vector<std::string>;

class CodecError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace token {
inline constexpr std::string_view kStart = "start";
inline constexpr std::string_view kGoal = "goal";
inline constexpr std::string_view kWall = "wall";
inline constexpr std::string_view kCreate = "create";
inline constexpr std::string_view kClose = "close";
inline constexpr std::string_view kPlan = "plan";
inline constexpr std::string_view kBos = "bos";
inline constexpr std::string_view kEos = "eos";
inline constexpr std::string_view kPad = "pad";
}  // namespace token

inline constexpr std::array<std::string_view, 9> kStructuralTokens{
    token::kStart, token::kGoal, token::kWall, token::kCreate, token::kClose,
    token::kPlan,  token::kBos,  token::kEos,  token::kPad,
};

/// Fixed token inventory: structural words, optional extra specials,
/// coordinate tokens "0".."max(W,H)-1", cost tokens "c0".."c<max_cost>".
class Vocabulary {
 public:
  Vocabulary(int width, int height, int max_cost, int extra_specials = 0)
      : width_(width), height_(height), max_cost_(max_cost) {
    if (width <= 0 || height <= 0 || max_cost < 0 || extra_specials < 0)
      throw std::invalid_argument("vocabulary parameters must be non-negative");
    for (auto t : kStructuralTokens) add(std::string(t));
    for (int i = 0; i < extra_specials; ++i) add("<extra_" + std::to_string(i) + ">");
    for (int i = 0; i < std::max(width, height); ++i) add(std::to_string(i));
    for (int c = 0; c <= max_cost; ++c) add("c" + std::to_string(c));
  }

  std::size_t size() const noexcept { return tokens_.size(); }
  int max_cost() const noexcept { return max_cost_; }
  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }

  std::optional<int> id(std::string_view tok) const {
    const auto it = ids_.find(std::string(tok));
    if (it == ids_.end()) return std::nullopt;
    return it->second;
  }
  const std::string& token(int id) const { return tokens_.at(static_cast<std::size_t>(id)); }
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }

  std::vector<int> to_ids(std::span<const std::string> seq) const {
    std::vector<int> out;
    out.reserve(seq.size());
    for (const auto& t : seq) {
      const auto i = id(t);
      if (!i) throw CodecError("token outside vocabulary: " + t);
      out.push_back(*i);
    }
    return out;
  }

  /// Two-column "token<TAB>id" table, one line per token in id order.
  std::string export_table() const {
    std::string out;
    for (std::size_t i = 0; i < tokens_.size(); ++i) out += tokens_[i] + '\t' + std::to_string(i) + '\n';
    return out;
  }

 private:
  void add(std::string t) {
    ids_.emplace(t, static_cast<int>(tokens_.size()));
    tokens_.push_back(std::move(t));
  }

  int width_;
  int height_;
  int max_cost_;
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> ids_;
};

/// Default cost bound is W·H.
inline Vocabulary build_vocab(int width, int height, std::optional<int> max_cost = std::nullopt,
                              int extra_specials = 0) {
  return Vocabulary(width, height, max_cost.value_or(width * height), extra_specials);
}

// --- text form -------------------------------------------------------------

inline EncodedSequence split_tokens(std::string_view text) {
  EncodedSequence out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && (text[i] == ' ' || text[i] == '\t' || text[i] == '\n' || text[i] == '\r')) ++i;
    const std::size_t begin = i;
    while (i < text.size() && !(text[i] == ' ' || text[i] == '\t' || text[i] == '\n' || text[i] == '\r')) ++i;
    if (i > begin) out.emplace_back(text.substr(begin, i - begin));
  }
  return out;
}

inline std::string join_tokens(std::span<const std::string> seq) {
  std::string out;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (i) out += ' ';
    out += seq[i];
  }
  return out;
}

namespace detail {

inline std::optional<int> parse_int(std::string_view s) {
  int v = 0;
  if (s.empty()) return std::nullopt;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size() || v < 0) return std::nullopt;
  return v;
}

inline std::optional<int> parse_cost(std::string_view s) {
  if (s.size() < 2 || s.front() != 'c') return std::nullopt;
  return parse_int(s.substr(1));
}

inline int expect_int(std::span<const std::string> seq, std::size_t i) {
  if (i >= seq.size()) throw CodecError("unexpected end of sequence at token " + std::to_string(i));
  const auto v = parse_int(seq[i]);
  if (!v) throw CodecError("expected coordinate at token " + std::to_string(i) + ", got '" + seq[i] + "'");
  return *v;
}

inline int expect_cost(std::span<const std::string> seq, std::size_t i) {
  if (i >= seq.size()) throw CodecError("unexpected end of sequence at token " + std::to_string(i));
  const auto v = parse_cost(seq[i]);
  if (!v) throw CodecError("expected cost token at token " + std::to_string(i) + ", got '" + seq[i] + "'");
  return *v;
}

inline void push_coord(EncodedSequence& out, Coord c) {
  out.push_back(std::to_string(c.x));
  out.push_back(std::to_string(c.y));
}

}  // namespace detail

// --- encoders --------------------------------------------------------------

/// `start x y goal x y` followed by `wall x y` for each wall, x ascending
/// then y ascending.
inline EncodedSequence encode_problem(const Grid& grid) {
  EncodedSequence out;
  out.reserve(6 + 3 * grid.layout().wall_count());
  out.emplace_back(token::kStart);
  detail::push_coord(out, grid.start());
  out.emplace_back(token::kGoal);
  detail::push_coord(out, grid.goal());
  for (int x = 0; x < grid.width(); ++x)
    for (int y = 0; y < grid.height(); ++y)
      if (!grid.is_free({x, y})) {
        out.emplace_back(token::kWall);
        detail::push_coord(out, {x, y});
      }
  return out;
}

/// Five tokens per event. With a vocabulary, costs above its bound throw.
inline EncodedSequence encode_trace(const Trace& trace, const Vocabulary* vocab = nullptr) {
  EncodedSequence out;
  out.reserve(5 * trace.size());
  for (const auto& e : trace) {
    if (vocab != nullptr && (e.g > vocab->max_cost() || e.h > vocab->max_cost()))
      throw CodecError("cost exceeds vocabulary bound c" + std::to_string(vocab->max_cost()));
    out.emplace_back(e.kind == EventKind::Create ? token::kCreate : token::kClose);
    detail::push_coord(out, e.pos);
    out.push_back("c" + std::to_string(e.g));
    out.push_back("c" + std::to_string(e.h));
  }
  return out;
}

inline EncodedSequence encode_plan(const Plan& plan) {
  EncodedSequence out;
  out.reserve(3 * plan.size());
  for (auto c : plan) {
    out.emplace_back(token::kPlan);
    detail::push_coord(out, c);
  }
  return out;
}

// --- strict decoders -------------------------------------------------------

inline Grid decode_problem(std::span<const std::string> seq, int width, int height) {
  if (seq.size() < 6 || seq[0] != token::kStart || seq[3] != token::kGoal)
    throw CodecError("problem must begin with 'start x y goal x y'");
  const Coord start{detail::expect_int(seq, 1), detail::expect_int(seq, 2)};
  const Coord goal{detail::expect_int(seq, 4), detail::expect_int(seq, 5)};
  Layout layout(width, height, Cell::Free);
  for (std::size_t i = 6; i < seq.size(); i += 3) {
    if (seq[i] != token::kWall) throw CodecError("expected 'wall' at token " + std::to_string(i));
    const Coord w{detail::expect_int(seq, i + 1), detail::expect_int(seq, i + 2)};
    if (!layout.in_bounds(w)) throw CodecError("wall outside grid at token " + std::to_string(i));
    layout.set(w, Cell::Wall);
  }
  try {
    return Grid(std::move(layout), start, goal);
  } catch (const GridError& e) {
    throw CodecError(std::string("decoded problem is not a valid grid: ") + e.what());
  }
}

inline Trace decode_trace(std::span<const std::string> seq) {
  if (seq.size() % 5 != 0) throw CodecError("trace length is not a multiple of 5");
  Trace out;
  out.reserve(seq.size() / 5);
  for (std::size_t i = 0; i < seq.size(); i += 5) {
    EventKind kind;
    if (seq[i] == token::kCreate) kind = EventKind::Create;
    else if (seq[i] == token::kClose) kind = EventKind::Close;
    else throw CodecError("expected 'create' or 'close' at token " + std::to_string(i));
    out.push_back({kind, {detail::expect_int(seq, i + 1), detail::expect_int(seq, i + 2)},
                   detail::expect_cost(seq, i + 3), detail::expect_cost(seq, i + 4)});
  }
  return out;
}

inline Plan decode_plan(std::span<const std::string> seq) {
  if (seq.size() % 3 != 0) throw CodecError("plan length is not a multiple of 3");
  Plan out;
  out.reserve(seq.size() / 3);
  for (std::size_t i = 0; i < seq.size(); i += 3) {
    if (seq[i] != token::kPlan) throw CodecError("expected 'plan' at token " + std::to_string(i));
    out.push_back({detail::expect_int(seq, i + 1), detail::expect_int(seq, i + 2)});
  }
  return out;
}

// --- lenient response parsing ----------------------------------------------

struct ParsedResponse {
  /// Tokens strictly before the first `plan` token (whole sequence if none).
  std::size_t intermediate_token_count = 0;
  std::size_t total_token_count = 0;
  std::optional<Plan> plan;
  /// Set when `plan` is empty: why, and the token index where parsing stopped.
  InvalidReason failure = InvalidReason::None;
  std::size_t failure_at = 0;
};

/// Splits arbitrary model output into an unvalidated intermediate region and
/// a plan region of repeating (plan, x, y) triples. A trailing eos/pad run
/// after the plan is accepted.
inline ParsedResponse parse_response(std::span<const std::string> seq) {
  ParsedResponse out;
  out.total_token_count = seq.size();
  std::size_t first = 0;
  while (first < seq.size() && seq[first] != token::kPlan) ++first;
  out.intermediate_token_count = first;
  if (first == seq.size()) {
    out.failure = InvalidReason::NoPlan;
    out.failure_at = first;
    return out;
  }

  Plan plan;
  std::size_t i = first;
  while (i < seq.size() && seq[i] == token::kPlan) {
    if (i + 2 >= seq.size()) {
      out.failure = InvalidReason::MalformedPlan;  // incomplete triple at tail
      out.failure_at = i;
      return out;
    }
    const auto x = detail::parse_int(seq[i + 1]);
    const auto y = detail::parse_int(seq[i + 2]);
    if (!x || !y) {
      out.failure = InvalidReason::MalformedPlan;
      out.failure_at = x ? i + 2 : i + 1;
      return out;
    }
    plan.push_back({*x, *y});
    i += 3;
  }
  for (std::size_t j = i; j < seq.size(); ++j)
    if (seq[j] != token::kEos && seq[j] != token::kPad) {
      out.failure = InvalidReason::MalformedPlan;
      out.failure_at = j;
      return out;
    }
  out.plan = std::move(plan);
  return out;
}

inline ParsedResponse parse_response(std::string_view text) {
  const auto seq = split_tokens(text);
  return parse_response(std::span<const std::string>(seq));
}

// --- strict trace replay ---------------------------------------------------

struct TraceCheck {
  bool ok = true;
  std::size_t at = 0;  // token index of the first violation
  std::string message;
};

/// Replays an intermediate region as A* operations on `grid` and reports the
/// first event that no legal expansion could have produced. Ordering among
/// open nodes is not checked.
inline TraceCheck replay_trace(const Grid& grid, std::span<const std::string> region) {
  const auto fail = [](std::size_t at, std::string msg) { return TraceCheck{false, at, std::move(msg)}; };
  Trace trace;
  try {
    trace = decode_trace(region);
  } catch (const CodecError& e) {
    return fail(region.size() - region.size() % 5, e.what());
  }
  const Layout& layout = grid.layout();
  std::vector<int> open_g(layout.size(), -1);
  std::vector<bool> closed(layout.size(), false);
  std::optional<TraceEvent> expanding;

  for (std::size_t k = 0; k < trace.size(); ++k) {
    const auto& e = trace[k];
    const std::size_t at = 5 * k;
    if (!layout.is_free(e.pos)) return fail(at, "event on a wall or out-of-bounds cell");
    if (e.h != manhattan(e.pos, grid.goal())) return fail(at, "heuristic does not match Manhattan distance");
    const auto idx = layout.index(e.pos);
    if (k == 0 && !(e.kind == EventKind::Close && e.pos == grid.start() && e.g == 0))
      return fail(at, "trace must begin by closing the start with g = 0");
    if (e.kind == EventKind::Close) {
      if (closed[idx]) return fail(at, "cell closed twice");
      if (k > 0 && open_g[idx] != e.g) return fail(at, "closed cell was never created with this g");
      closed[idx] = true;
      expanding = e;
      if (e.pos == grid.goal()) {
        if (k + 1 != trace.size()) return fail(at + 5, "events after the goal was closed");
        break;
      }
    } else {
      if (!expanding) return fail(at, "create before any expansion");
      if (manhattan(expanding->pos, e.pos) != 1) return fail(at, "created cell is not adjacent to the expanded cell");
      if (closed[idx]) return fail(at, "created cell is already closed");
      if (e.g != expanding->g + 1) return fail(at, "g is not parent g + 1");
      if (open_g[idx] >= 0 && e.g >= open_g[idx]) return fail(at, "re-created without improving g");
      open_g[idx] = e.g;
    }
  }
  return {};
}

}  // namespace tracegrid
