#pragma once

#include <bit>
#include <charconv>
#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rng.hpp"

// Directed Erdos-Renyi adjacency eps_{i,j} ~ Bernoulli(p), i.i.d. over all
// N^2 ordered pairs, self-loops included. Sampling is counter-based: cell
// (i,j) is decided by hashing (seed, i*N+j) alone, so any cell can be
// regenerated without streaming and the matrix is reproducible bit-for-bit
// across platforms. Rows are stored as packed 64-bit words.

namespace dising::graph {

class GraphSample {
public:
    static GraphSample sample(std::int64_t n, double p, std::uint64_t seed) {
        if (n < 1) throw std::invalid_argument("sample_graph: N must be >= 1");
        if (!(p > 0.0 && p <= 1.0))
            throw std::invalid_argument("sample_graph: p must be in (0,1]");
        GraphSample g(n, p, seed);
        if (p == 1.0) {
            // Deterministic all-ones matrix; no randomness consumed.
            for (std::int64_t i = 0; i < n; ++i)
                for (std::int64_t j = 0; j < n; ++j) g.set_edge(i, j, true);
            return g;
        }
        for (std::int64_t i = 0; i < n; ++i) {
            for (std::int64_t j = 0; j < n; ++j) {
                const std::uint64_t cell = static_cast<std::uint64_t>(i) *
                                               static_cast<std::uint64_t>(n) +
                                           static_cast<std::uint64_t>(j);
                if (rng::to_unit(rng::derive(seed, cell)) < p)
                    g.set_edge(i, j, true);
            }
        }
        return g;
    }

    // Blank matrix for hand-built adjacency in tests/tools.
    static GraphSample zeros(std::int64_t n, double p = 1.0, std::uint64_t seed = 0) {
        if (n < 1) throw std::invalid_argument("GraphSample: N must be >= 1");
        return GraphSample(n, p, seed);
    }

    std::int64_t size() const { return n_; }
    double p() const { return p_; }
    std::uint64_t seed() const { return seed_; }
    std::size_t words_per_row() const { return words_; }

    bool edge(std::int64_t i, std::int64_t j) const {
        check_index(i, j);
        return (rows_[static_cast<std::size_t>(i) * words_ + static_cast<std::size_t>(j) / 64] >>
                (static_cast<std::size_t>(j) % 64)) & 1ULL;
    }

    void set_edge(std::int64_t i, std::int64_t j, bool value) {
        check_index(i, j);
        std::uint64_t& w =
            rows_[static_cast<std::size_t>(i) * words_ + static_cast<std::size_t>(j) / 64];
        const std::uint64_t bit = 1ULL << (static_cast<std::size_t>(j) % 64);
        if (value) w |= bit; else w &= ~bit;
    }

    const std::uint64_t* row(std::int64_t i) const {
        return rows_.data() + static_cast<std::size_t>(i) * words_;
    }

    std::uint64_t edge_count() const {
        std::uint64_t total = 0;
        for (std::uint64_t w : rows_) total += static_cast<std::uint64_t>(std::popcount(w));
        return total;
    }

    // Text serialization: header line "N p seed", then one lowercase hex
    // line per row (bits packed LSB-first into bytes, row-major).
    std::string dump() const {
        std::string out = format_header();
        const std::size_t bytes = (static_cast<std::size_t>(n_) + 7) / 8;
        for (std::int64_t i = 0; i < n_; ++i) {
            out.push_back('\n');
            const std::uint64_t* r = row(i);
            for (std::size_t b = 0; b < bytes; ++b) {
                const unsigned byte =
                    static_cast<unsigned>((r[b / 8] >> (8 * (b % 8))) & 0xffULL);
                out.push_back(kHex[byte >> 4]);
                out.push_back(kHex[byte & 0xf]);
            }
        }
        out.push_back('\n');
        return out;
    }

    static GraphSample load(std::istream& in) {
        std::string header;
        if (!std::getline(in, header))
            throw std::invalid_argument("GraphSample::load: missing header line");
        std::istringstream hs(header);
        std::int64_t n = 0;
        double p = 0.0;
        std::uint64_t seed = 0;
        if (!(hs >> n >> p >> seed))
            throw std::invalid_argument("GraphSample::load: malformed header");
        if (n < 1) throw std::invalid_argument("GraphSample::load: N must be >= 1");
        if (!(p > 0.0 && p <= 1.0))
            throw std::invalid_argument("GraphSample::load: p must be in (0,1]");
        GraphSample g(n, p, seed);
        const std::size_t bytes = (static_cast<std::size_t>(n) + 7) / 8;
        std::string line;
        for (std::int64_t i = 0; i < n; ++i) {
            if (!std::getline(in, line))
                throw std::invalid_argument("GraphSample::load: missing row " + std::to_string(i));
            if (line.size() != 2 * bytes)
                throw std::invalid_argument("GraphSample::load: bad row length");
            for (std::size_t b = 0; b < bytes; ++b) {
                const int hi = hex_val(line[2 * b]), lo = hex_val(line[2 * b + 1]);
                const std::uint64_t byte = static_cast<std::uint64_t>(hi << 4 | lo);
                g.rows_[static_cast<std::size_t>(i) * g.words_ + b / 8] |= byte << (8 * (b % 8));
            }
            // Reject stray bits past column N.
            const std::uint64_t* r = g.row(i);
            std::uint64_t count = 0;
            for (std::size_t w = 0; w < g.words_; ++w)
                count += static_cast<std::uint64_t>(std::popcount(r[w]));
            std::uint64_t in_range = 0;
            for (std::int64_t j = 0; j < n; ++j) in_range += g.edge(i, j) ? 1 : 0;
            if (count != in_range)
                throw std::invalid_argument("GraphSample::load: bits beyond column N");
        }
        return g;
    }

    static GraphSample load(const std::string& text) {
        std::istringstream in(text);
        return load(in);
    }

    bool operator==(const GraphSample& other) const {
        return n_ == other.n_ && rows_ == other.rows_;
    }

private:
    GraphSample(std::int64_t n, double p, std::uint64_t seed)
        : n_(n), p_(p), seed_(seed), words_((static_cast<std::size_t>(n) + 63) / 64),
          rows_(static_cast<std::size_t>(n) * words_, 0) {}

    void check_index(std::int64_t i, std::int64_t j) const {
        if (i < 0 || i >= n_ || j < 0 || j >= n_)
            throw std::out_of_range("GraphSample: index out of range");
    }

    std::string format_header() const {
        char buf[64];
        std::string out;
        auto r1 = std::to_chars(buf, buf + sizeof(buf), n_);
        out.append(buf, r1.ptr);
        out.push_back(' ');
        auto r2 = std::to_chars(buf, buf + sizeof(buf), p_);
        out.append(buf, r2.ptr);
        out.push_back(' ');
        auto r3 = std::to_chars(buf, buf + sizeof(buf), seed_);
        out.append(buf, r3.ptr);
        return out;
    }

    static int hex_val(char c) {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        throw std::invalid_argument("GraphSample::load: invalid hex digit");
    }

    static constexpr char kHex[] = "0123456789abcdef";

    std::int64_t n_;
    double p_;
    std::uint64_t seed_;
    std::size_t words_;
    std::vector<std::uint64_t> rows_;
};

inline std::uint64_t edge_count(const GraphSample& g) { return g.edge_count(); }

// Symmetrized off-diagonal pair weights w_{i,j} = eps_{i,j} + eps_{j,i}
// (i != j), split into a weight-1 mask and a weight-2 mask per site, plus
// the diagonal loops. This is the geometry used by both exact enumeration
// and the Glauber chain: flipping sigma_t changes the interaction sum by
// -2 sigma_t * sum_j w_{t,j} sigma_j.
struct PairMasks {
    std::int64_t n = 0;
    std::size_t words = 0;
    std::vector<std::uint64_t> once;   // w_{i,j} == 1
    std::vector<std::uint64_t> twice;  // w_{i,j} == 2
    std::vector<std::uint8_t> loop;    // eps_{i,i}

    const std::uint64_t* once_row(std::int64_t i) const {
        return once.data() + static_cast<std::size_t>(i) * words;
    }
    const std::uint64_t* twice_row(std::int64_t i) const {
        return twice.data() + static_cast<std::size_t>(i) * words;
    }
};

inline PairMasks pair_masks(const GraphSample& g) {
    PairMasks m;
    m.n = g.size();
    m.words = g.words_per_row();
    m.once.assign(static_cast<std::size_t>(m.n) * m.words, 0);
    m.twice.assign(static_cast<std::size_t>(m.n) * m.words, 0);
    m.loop.assign(static_cast<std::size_t>(m.n), 0);
    for (std::int64_t i = 0; i < m.n; ++i) {
        m.loop[static_cast<std::size_t>(i)] = g.edge(i, i) ? 1 : 0;
        for (std::int64_t j = 0; j < m.n; ++j) {
            if (i == j) continue;
            const int w = (g.edge(i, j) ? 1 : 0) + (g.edge(j, i) ? 1 : 0);
            if (w == 0) continue;
            auto* dst = (w == 1 ? m.once.data() : m.twice.data());
            dst[static_cast<std::size_t>(i) * m.words + static_cast<std::size_t>(j) / 64] |=
                1ULL << (static_cast<std::size_t>(j) % 64);
        }
    }
    return m;
}

}  // namespace dising::graph
