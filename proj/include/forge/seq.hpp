#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <limits>
#include <cstdint>
#include <map>
#include <numeric>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "forge/geometry.hpp"

namespace forge {

using Token = std::int32_t;

/// Vertex quantizer over an H x W grid at scale s_x, s_y (cells per metre),
/// centred on the robot. Vertex tokens are 0 .. HW-1; Start = HW, End = HW+1.
struct QuantizerConfig {
    int rows = 121;
    int cols = 121;
    double scale_x = 121.0 / 15.0;
    double scale_y = 121.0 / 15.0;

    static QuantizerConfig square(int size, double area) { return {size, size, size / area, size / area}; }

    Token vertex_count() const { return static_cast<Token>(rows) * static_cast<Token>(cols); }
    Token start() const { return vertex_count(); }
    Token end() const { return vertex_count() + 1; }
    std::size_t vocabulary_size() const { return static_cast<std::size_t>(vertex_count()) + 2; }
    bool is_vertex(Token t) const { return t >= 0 && t < vertex_count(); }
    double extent_x() const { return cols / scale_x; }
    double extent_y() const { return rows / scale_y; }
};

struct Quantized {
    Token token;
    /// The vertex was outside the grid extent and got clamped.
    bool clamped;
};

/// Row-major index of the cell containing (x, y):
/// W * floor(H/2 - s_y y) + floor(W/2 + s_x x), clamped into the grid.
inline Quantized quantize_vertex(Point p, const QuantizerConfig& cfg)
{
    const double row = std::floor(0.5 * cfg.rows - cfg.scale_y * p.y);
    const double col = std::floor(0.5 * cfg.cols + cfg.scale_x * p.x);
    const double r = std::clamp(row, 0.0, cfg.rows - 1.0);
    const double c = std::clamp(col, 0.0, cfg.cols - 1.0);
    return {static_cast<Token>(r) * cfg.cols + static_cast<Token>(c), r != row || c != col};
}

/// Centre of the cell a vertex token refers to.
inline Point dequantize_vertex(Token t, const QuantizerConfig& cfg)
{
    const int row = t / cfg.cols;
    const int col = t % cfg.cols;
    return {(col + 0.5 - 0.5 * cfg.cols) / cfg.scale_x, (0.5 * cfg.rows - row - 0.5) / cfg.scale_y};
}

/// Order the vertices of a segment: (x < x') or (x = x' and y <= y').
inline Segment vertex_ordered(Segment s)
{
    if (s.b.x < s.a.x || (s.b.x == s.a.x && s.b.y < s.a.y)) std::swap(s.a, s.b);
    return s;
}

/// Vertex-order every row, then sort rows by distance from `robot` to the
/// nearest point of the segment; ties by the (x, y, x', y') tuple.
inline SegmentSet order_segments(SegmentSet segs, Point robot = {})
{
    struct Keyed {
        double dist;
        Segment s;
    };
    std::vector<Keyed> keyed;
    keyed.reserve(segs.size());
    for (const auto& s : segs) {
        const Segment o = vertex_ordered(s);
        keyed.push_back({point_segment_distance(robot, o), o});
    }
    std::stable_sort(keyed.begin(), keyed.end(), [](const Keyed& l, const Keyed& r) {
        return std::tie(l.dist, l.s.a.x, l.s.a.y, l.s.b.x, l.s.b.y) <
               std::tie(r.dist, r.s.a.x, r.s.a.y, r.s.b.x, r.s.b.y);
    });
    SegmentSet out;
    out.reserve(keyed.size());
    for (const auto& k : keyed) out.push_back(k.s);
    return out;
}

/// Cut every segment where it crosses the lines of a `divisions` x
/// `divisions` regular grid spanning [-extent/2, extent/2]^2.
inline SegmentSet subdivide(std::span<const Segment> segs, double extent, int divisions = 21)
{
    const double spacing = extent / divisions;
    const double lo = -0.5 * extent;
    SegmentSet out;
    for (const auto& s : segs) {
        std::vector<double> cuts{0.0, 1.0};
        auto crossings = [&](double a, double b) {
            if (a == b) return;
            const double ka = (a - lo) / spacing, kb = (b - lo) / spacing;
            for (double k = std::ceil(std::min(ka, kb)); k <= std::floor(std::max(ka, kb)); k += 1.0) {
                const double t = (lo + k * spacing - a) / (b - a);
                if (t > 0.0 && t < 1.0) cuts.push_back(t);
            }
        };
        crossings(s.a.x, s.b.x);
        crossings(s.a.y, s.b.y);
        std::sort(cuts.begin(), cuts.end());
        Point prev = s.a;
        for (std::size_t k = 1; k < cuts.size(); ++k) {
            const Point next = k + 1 == cuts.size() ? s.b : s.at(cuts[k]);
            if (next != prev) out.push_back({prev, next});
            prev = next;
        }
    }
    return out;
}

/// Start-delimited token sequence; complete when it also ends with End.
struct TokenSequence {
    std::vector<Token> tokens;
    bool complete = true;

    friend bool operator==(const TokenSequence&, const TokenSequence&) = default;
};

class MalformedSequence : public std::runtime_error {
public:
    MalformedSequence(const std::string& what, std::size_t index)
        : std::runtime_error(what + " at token index " + std::to_string(index)), index_(index)
    {
    }
    std::size_t index() const { return index_; }

private:
    std::size_t index_;
};

struct TokenizeOptions {
    bool subdivide = true;
    int divisions = 21;
};

struct CodecStats {
    std::size_t clamped_vertices = 0;
};

/// Start, the two vertex tokens of each (subdivided, ordered) segment, End.
/// Rows are ordered on their quantized geometry, so re-encoding the
/// detokenized segments reproduces the sequence.
inline TokenSequence tokenize(std::span<const Segment> segs, const QuantizerConfig& cfg, Point robot = {},
                              const TokenizeOptions& opt = {}, CodecStats* stats = nullptr)
{
    SegmentSet pieces = opt.subdivide ? subdivide(segs, cfg.extent_x(), opt.divisions)
                                      : SegmentSet(segs.begin(), segs.end());
    for (auto& s : pieces) {
        const auto qa = quantize_vertex(s.a, cfg);
        const auto qb = quantize_vertex(s.b, cfg);
        if (stats) stats->clamped_vertices += static_cast<std::size_t>(qa.clamped) + static_cast<std::size_t>(qb.clamped);
        s = {dequantize_vertex(qa.token, cfg), dequantize_vertex(qb.token, cfg)};
    }
    TokenSequence seq;
    seq.tokens.reserve(2 * pieces.size() + 2);
    seq.tokens.push_back(cfg.start());
    for (const auto& s : order_segments(std::move(pieces), robot)) {
        seq.tokens.push_back(quantize_vertex(s.a, cfg).token);
        seq.tokens.push_back(quantize_vertex(s.b, cfg).token);
    }
    seq.tokens.push_back(cfg.end());
    return seq;
}

/// Inverse of tokenize: consecutive vertex-token pairs become segments
/// between cell centres.
inline SegmentSet detokenize(std::span<const Token> tokens, const QuantizerConfig& cfg)
{
    if (tokens.empty() || tokens.front() != cfg.start()) throw MalformedSequence("missing Start token", 0);
    if (tokens.size() < 2 || tokens.back() != cfg.end())
        throw MalformedSequence("missing End token", tokens.size() == 0 ? 0 : tokens.size() - 1);
    const std::size_t interior = tokens.size() - 2;
    for (std::size_t i = 1; i + 1 < tokens.size(); ++i)
        if (!cfg.is_vertex(tokens[i])) throw MalformedSequence("non-vertex token inside sequence", i);
    if (interior % 2 != 0) throw MalformedSequence("odd number of vertex tokens", tokens.size() - 2);
    SegmentSet out;
    for (std::size_t i = 1; i + 1 < tokens.size(); i += 2)
        out.push_back({dequantize_vertex(tokens[i], cfg), dequantize_vertex(tokens[i + 1], cfg)});
    return out;
}

inline SegmentSet detokenize(const TokenSequence& seq, const QuantizerConfig& cfg) { return detokenize(seq.tokens, cfg); }

/// Vertex tokens as integers, Start and End as "S" and "E".
inline nlohmann::json to_json(const TokenSequence& seq, const QuantizerConfig& cfg)
{
    nlohmann::json out = nlohmann::json::array();
    for (Token t : seq.tokens) {
        if (t == cfg.start())
            out.push_back("S");
        else if (t == cfg.end())
            out.push_back("E");
        else
            out.push_back(t);
    }
    return out;
}

inline TokenSequence token_sequence_from_json(const nlohmann::json& j, const QuantizerConfig& cfg)
{
    TokenSequence seq;
    for (const auto& v : j) {
        if (v.is_string())
            seq.tokens.push_back(v.get<std::string>() == "S" ? cfg.start() : cfg.end());
        else
            seq.tokens.push_back(v.get<Token>());
    }
    seq.complete = !seq.tokens.empty() && seq.tokens.back() == cfg.end();
    return seq;
}

/// A next-token distribution P(t_i | t_<i, C) over the vocabulary.
template <typename P, typename Context>
concept NextTokenProvider = requires(const P& p, std::span<const Token> prefix, const Context& ctx) {
    { p.vocabulary_size() } -> std::convertible_to<std::size_t>;
    { p.distribution(prefix, ctx) } -> std::convertible_to<std::vector<double>>;
};

struct NoContext {};

/// The smallest set of tokens whose cumulative probability reaches `p`
/// (most probable first, ties by token id), renormalized.
inline std::vector<std::pair<Token, double>> nucleus(std::span<const double> probs, double p)
{
    // Tokens at the smallest positive probability form one tied block that
    // stays in id order, so only the tokens above it need sorting.
    double floor = std::numeric_limits<double>::infinity();
    for (double q : probs)
        if (q > 0.0) floor = std::min(floor, q);
    std::vector<Token> order;
    for (std::size_t t = 0; t < probs.size(); ++t)
        if (probs[t] > floor) order.push_back(static_cast<Token>(t));
    std::stable_sort(order.begin(), order.end(), [&](Token a, Token b) {
        return probs[static_cast<std::size_t>(a)] > probs[static_cast<std::size_t>(b)];
    });
    std::vector<std::pair<Token, double>> kept;
    double mass = 0.0;
    auto take = [&](Token t) {
        const double q = probs[static_cast<std::size_t>(t)];
        kept.emplace_back(t, q);
        mass += q;
        return mass >= p - 1e-12;
    };
    bool done = false;
    for (Token t : order)
        if ((done = take(t))) break;
    for (std::size_t t = 0; !done && t < probs.size(); ++t)
        if (probs[t] == floor) done = take(static_cast<Token>(t));
    for (auto& [t, q] : kept) q /= mass;
    return kept;
}

/// Autoregressive top-p sampling from [Start] until End or `max_len` tokens.
template <typename Provider, typename Context = NoContext>
    requires NextTokenProvider<Provider, Context>
TokenSequence sample_sequence(const Provider& provider, Token start, Token end, double p, std::size_t max_len,
                              std::uint64_t seed, const Context& ctx = {})
{
    if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("top-p must lie in (0, 1]");
    std::mt19937_64 rng(seed);
    TokenSequence seq;
    seq.tokens.push_back(start);
    seq.complete = false;
    while (seq.tokens.size() < max_len) {
        const std::vector<double> probs = provider.distribution(seq.tokens, ctx);
        const auto kept = nucleus(probs, p);
        if (kept.empty()) break;
        double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        Token pick = kept.back().first;
        for (const auto& [t, q] : kept) {
            if (u < q) {
                pick = t;
                break;
            }
            u -= q;
        }
        seq.tokens.push_back(pick);
        if (pick == end) {
            seq.complete = true;
            break;
        }
    }
    return seq;
}

/// Additively smoothed n-gram model over the token vocabulary. Contexts
/// shorter than n-1 tokens (at the sequence start) are left-padded with -1.
class NgramProvider {
public:
    NgramProvider() = default;
    NgramProvider(std::size_t order, std::size_t vocabulary, double smoothing)
        : order_(order), vocabulary_(vocabulary), smoothing_(smoothing)
    {
        if (order_ < 1) throw std::invalid_argument("n-gram order must be >= 1");
    }

    std::size_t order() const { return order_; }
    std::size_t vocabulary_size() const { return vocabulary_; }
    double smoothing() const { return smoothing_; }

    void add(std::span<const Token> sequence)
    {
        for (std::size_t i = 1; i < sequence.size(); ++i) {
            auto& row = counts_[context_of(sequence.first(i))];
            ++row.total;
            ++row.next[sequence[i]];
        }
    }

    template <typename Context = NoContext>
    std::vector<double> distribution(std::span<const Token> prefix, const Context& = {}) const
    {
        const double floor_mass = smoothing_;
        const auto it = counts_.find(context_of(prefix));
        if (it == counts_.end())
            return std::vector<double>(vocabulary_, 1.0 / static_cast<double>(vocabulary_));
        const double denom = static_cast<double>(it->second.total) + floor_mass * static_cast<double>(vocabulary_);
        std::vector<double> out(vocabulary_, floor_mass / denom);
        for (const auto& [t, c] : it->second.next) out[static_cast<std::size_t>(t)] += static_cast<double>(c) / denom;
        return out;
    }

    nlohmann::json to_json() const
    {
        nlohmann::json rows = nlohmann::json::array();
        for (const auto& [ctx, row] : counts_) {
            nlohmann::json next = nlohmann::json::array();
            for (const auto& [t, c] : row.next) next.push_back({t, c});
            rows.push_back({{"context", ctx}, {"next", next}});
        }
        return {{"order", order_}, {"vocabulary", vocabulary_}, {"smoothing", smoothing_}, {"rows", rows}};
    }

    static NgramProvider from_json(const nlohmann::json& j)
    {
        NgramProvider p(j.at("order").get<std::size_t>(), j.at("vocabulary").get<std::size_t>(),
                        j.at("smoothing").get<double>());
        for (const auto& row : j.at("rows")) {
            auto& r = p.counts_[row.at("context").get<std::vector<Token>>()];
            for (const auto& n : row.at("next")) {
                const auto c = n[1].get<std::uint64_t>();
                r.next[n[0].get<Token>()] += c;
                r.total += c;
            }
        }
        return p;
    }

private:
    struct Row {
        std::uint64_t total = 0;
        std::map<Token, std::uint64_t> next;
    };

    std::vector<Token> context_of(std::span<const Token> prefix) const
    {
        const std::size_t width = order_ - 1;
        std::vector<Token> ctx(width, -1);
        const std::size_t take = std::min(width, prefix.size());
        std::copy(prefix.end() - static_cast<std::ptrdiff_t>(take), prefix.end(),
                  ctx.end() - static_cast<std::ptrdiff_t>(take));
        return ctx;
    }

    std::size_t order_ = 2;
    std::size_t vocabulary_ = 0;
    double smoothing_ = 1.0;
    std::map<std::vector<Token>, Row> counts_;
};

inline NgramProvider fit_ngram(std::span<const TokenSequence> corpus, std::size_t order, std::size_t vocabulary,
                               double smoothing = 1.0)
{
    if (corpus.empty()) throw std::invalid_argument("n-gram corpus is empty");
    NgramProvider p(order, vocabulary, smoothing);
    for (const auto& seq : corpus) p.add(seq.tokens);
    return p;
}

/// Masks a provider so that sampled sequences decode: Start never recurs
/// and End may only follow a complete vertex pair.
template <typename Provider>
class PairGrammar {
public:
    PairGrammar(const Provider& inner, const QuantizerConfig& cfg) : inner_(&inner), cfg_(cfg) {}

    std::size_t vocabulary_size() const { return inner_->vocabulary_size(); }

    template <typename Context = NoContext>
    std::vector<double> distribution(std::span<const Token> prefix, const Context& ctx = {}) const
    {
        auto probs = inner_->distribution(prefix, ctx);
        probs[static_cast<std::size_t>(cfg_.start())] = 0.0;
        const bool pair_open = (prefix.size() - 1) % 2 == 1;
        if (pair_open) probs[static_cast<std::size_t>(cfg_.end())] = 0.0;
        const double total = std::accumulate(probs.begin(), probs.end(), 0.0);
        if (total <= 0.0) {
            std::fill(probs.begin(), probs.end(), 0.0);
            probs[static_cast<std::size_t>(pair_open ? 0 : cfg_.end())] = 1.0;
            return probs;
        }
        for (auto& q : probs) q /= total;
        return probs;
    }

private:
    const Provider* inner_;
    QuantizerConfig cfg_;
};

}  // namespace forge
