#pragma once

// Raptor fountain codec over GF(2): dense precode, LT inner code, ML decoding.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "cmtlab/degree_distribution.hpp"
#include "cmtlab/error.hpp"
#include "cmtlab/gf2_matrix.hpp"
#include "cmtlab/rng.hpp"

namespace cmtlab {

/// Intermediate symbols per source symbol when a codec is configured with defaults.
inline constexpr std::size_t kDefaultPrecodeExpansion = 4;

struct CodecParams {
    std::size_t source_count = 1;        // g
    std::size_t intermediate_count = 1;  // m >= g
    DegreeDistribution distribution = DegreeDistribution({1.0});
    std::uint64_t seed = 0;
    std::size_t feedback_window = 0;  // slots to wait for ACKs; 0 = no-response mode

    /// m = 4g intermediate symbols and a robust soliton law (c = 0.1, delta = 0.5) over them.
    static CodecParams defaults(std::size_t g, std::uint64_t seed) {
        if (g == 0) {
            throw InvalidParams("codec: source count must be >= 1");
        }
        const std::size_t m = kDefaultPrecodeExpansion * g;
        return CodecParams{g, m, DegreeDistribution::robust_soliton(m), seed, 0};
    }

    void validate() const {
        if (source_count == 0) {
            throw InvalidParams("codec: source count must be >= 1");
        }
        if (intermediate_count < source_count) {
            throw InvalidParams("codec: intermediate count m=" + std::to_string(intermediate_count) +
                                " is below source count g=" + std::to_string(source_count));
        }
        if (!distribution.has_degree_one()) {
            throw InvalidParams("codec: degree distribution must give degree 1 positive probability");
        }
    }
};

/// One generation of g equally sized source packets (rows of `payloads`).
struct SourceBlock {
    std::uint64_t block_id = 0;
    Gf2Matrix payloads;

    std::size_t size() const noexcept { return payloads.rows(); }
    std::size_t packet_bits() const noexcept { return payloads.cols(); }

    void validate(std::size_t max_block) const {
        if (size() < 1 || size() > max_block) {
            throw InvalidParams("source block: packet count " + std::to_string(size()) +
                                " outside [1, " + std::to_string(max_block) + "]");
        }
    }

    static SourceBlock random(std::uint64_t block_id, std::size_t g, std::size_t packet_bits, Rng& rng) {
        SourceBlock b{block_id, Gf2Matrix(g, packet_bits)};
        const std::size_t tail = packet_bits % 64;
        for (std::size_t r = 0; r < g; ++r) {
            auto words = b.payloads.row(r);
            for (auto& w : words) {
                w = rng.next();
            }
            if (tail != 0 && !words.empty()) {
                words.back() &= (Gf2Matrix::Word{1} << tail) - 1;
            }
        }
        return b;
    }
};

/// Coded packets with their effective width-g generator rows.
struct CodedBlock {
    std::uint64_t block_id = 0;
    Gf2Matrix generator_rows;  // n x g
    Gf2Matrix payloads;        // n x packet_bits

    std::size_t size() const noexcept { return generator_rows.rows(); }

    CodedBlock select(std::span<const std::size_t> indices) const {
        return {block_id, generator_rows.select_rows(indices), payloads.select_rows(indices)};
    }

    static CodedBlock concat(const CodedBlock& a, const CodedBlock& b) {
        return {a.block_id, Gf2Matrix::stack(a.generator_rows, b.generator_rows),
                Gf2Matrix::stack(a.payloads, b.payloads)};
    }
};

/// m x g precode: identity over the g source symbols followed by (m - g) rows
/// of seeded uniform bits drawn from substream `streams::kPrecode`, row-major,
/// one `next()` word per 64 columns (low bit = lowest column, excess bits masked).
inline Gf2Matrix build_precode(const CodecParams& params) {
    params.validate();
    const std::size_t g = params.source_count;
    const std::size_t m = params.intermediate_count;
    Gf2Matrix pre(m, g);
    for (std::size_t i = 0; i < g; ++i) {
        pre.set(i, i, true);
    }
    Rng rng(params.seed, streams::kPrecode);
    const std::size_t tail = g % 64;
    for (std::size_t r = g; r < m; ++r) {
        auto words = pre.row(r);
        for (auto& w : words) {
            w = rng.next();
        }
        if (tail != 0) {
            words.back() &= (Gf2Matrix::Word{1} << tail) - 1;
        }
    }
    return pre;
}

/// Writes one LT row of width m: degree from `dist` (capped at m), columns
/// distinct and uniform (Floyd's subset sampling).
inline void lt_row(std::size_t m, const DegreeDistribution& dist, Rng& rng, std::span<Gf2Matrix::Word> out) {
    std::ranges::fill(out, 0);
    const std::size_t d = std::min(dist.sample(rng), m);
    for (std::size_t j = m - d; j < m; ++j) {
        const auto t = static_cast<std::size_t>(rng.uniform_below(j + 1));
        const bool taken = (out[t / 64] >> (t % 64)) & 1U;
        const std::size_t pick = taken ? j : t;
        out[pick / 64] |= Gf2Matrix::Word{1} << (pick % 64);
    }
}

/// n x m LT generator; row i uses substream `first_stream + i` of `seed`.
inline Gf2Matrix lt_encode(std::size_t m, const DegreeDistribution& dist, std::size_t n, std::uint64_t seed,
                           std::uint64_t first_stream = 0) {
    if (m == 0) {
        throw InvalidParams("lt_encode: intermediate count must be >= 1");
    }
    Gf2Matrix rows(n, m);
    for (std::size_t i = 0; i < n; ++i) {
        Rng rng(seed, first_stream + i);
        lt_row(m, dist, rng, rows.row(i));
    }
    return rows;
}

/// Effective width-g generator rows (LT rows times precode).
inline Gf2Matrix raptor_generator(const CodecParams& params, const Gf2Matrix& precode, std::size_t n,
                                  std::uint64_t first_stream = 0) {
    return lt_encode(params.intermediate_count, params.distribution, n, params.seed, first_stream) * precode;
}

/// Encoder bound to one source block. Packet i is a pure function of
/// (params, i), so any prefix of a longer encoding equals a shorter one.
class RaptorEncoder {
public:
    RaptorEncoder(SourceBlock block, CodecParams params)
        : block_(std::move(block)), params_(std::move(params)) {
        params_.validate();
        if (block_.size() != params_.source_count) {
            throw StructuralError("raptor encoder: block has " + std::to_string(block_.size()) +
                                  " packets but params expect " + std::to_string(params_.source_count));
        }
        precode_ = build_precode(params_);
    }

    const CodecParams& params() const noexcept { return params_; }
    const Gf2Matrix& precode() const noexcept { return precode_; }
    bool feedback_enabled() const noexcept { return params_.feedback_window > 0; }

    CodedBlock encode(std::size_t n) const {
        if (n == 0) {
            throw InvalidParams("raptor encode: packet count must be >= 1");
        }
        Gf2Matrix gen = raptor_generator(params_, precode_, n);
        Gf2Matrix pay = gen * block_.payloads;
        return {block_.block_id, std::move(gen), std::move(pay)};
    }

    /// Additional packets answering a missing ACK. Drawn from a reserved
    /// substream so they are indistinguishable from regular packets.
    CodedBlock fix_packets(std::size_t count) {
        if (!feedback_enabled()) {
            throw InvalidParams("raptor encode: fix packets requested in no-response mode (w = 0)");
        }
        Gf2Matrix gen = raptor_generator(params_, precode_, count, streams::kFixPacketBase + fix_emitted_);
        fix_emitted_ += count;
        Gf2Matrix pay = gen * block_.payloads;
        return {block_.block_id, std::move(gen), std::move(pay)};
    }

private:
    SourceBlock block_;
    CodecParams params_;
    Gf2Matrix precode_;
    std::uint64_t fix_emitted_ = 0;
};

inline CodedBlock raptor_encode(const SourceBlock& block, const CodecParams& params, std::size_t n) {
    return RaptorEncoder(block, params).encode(n);
}

struct FullDecode {
    Gf2Matrix payloads;  // g x packet_bits, equal to the source block
};

struct PartialDecode {
    std::vector<std::size_t> recovered;  // sorted source indices
    Gf2Matrix payloads;                  // one row per entry of `recovered`
};

using DecodeResult = std::variant<FullDecode, PartialDecode>;

/// Maximum-likelihood erasure decoding by Gaussian elimination over GF(2).
inline DecodeResult ml_decode(const CodedBlock& received, std::size_t g) {
    if (received.size() > 0 && received.generator_rows.cols() != g) {
        throw StructuralError("ml_decode: generator rows have width " +
                              std::to_string(received.generator_rows.cols()) + ", expected " + std::to_string(g));
    }
    if (received.payloads.rows() != received.generator_rows.rows()) {
        throw StructuralError("ml_decode: payload count differs from generator row count");
    }
    if (received.size() == 0) {
        return PartialDecode{{}, Gf2Matrix(0, received.payloads.cols())};
    }
    Gf2Matrix gen = received.generator_rows;
    Gf2Matrix pay = received.payloads;
    const auto pivots = gen.eliminate(&pay);
    if (pivots.size() == g) {
        return FullDecode{pay.slice_rows(0, g)};
    }
    PartialDecode out{{}, Gf2Matrix(0, pay.cols())};
    for (std::size_t i = 0; i < pivots.size(); ++i) {
        if (gen.row_weight(i) == 1) {
            out.recovered.push_back(pivots[i]);
            out.payloads.append_row(pay.row(i));
        }
    }
    return out;
}

/// |{i : e_i in rowspace(rows)}|.
inline std::size_t recoverable_count(const Gf2Matrix& rows, std::size_t g) {
    if (rows.rows() > 0 && rows.cols() != g) {
        throw StructuralError("recoverable_count: row width mismatch");
    }
    RowSpace space(g);
    for (std::size_t r = 0; r < rows.rows(); ++r) {
        space.insert(rows.row(r));
    }
    return space.unit_count();
}

struct CurvePoint {
    std::size_t received = 0;
    double mean_recovered = 0.0;
    double decode_probability = 0.0;
};

/// Monte Carlo decode curve for k = 0..max_received surviving packets.
///
/// `source(trial)` returns at least `max_received` width-g rows; the first k
/// of them are the survivors at step k.
template <class RowSource>
std::vector<CurvePoint> decode_curve(std::size_t g, std::size_t max_received, std::size_t trials,
                                     RowSource&& source) {
    if (trials == 0) {
        throw InvalidParams("decode_curve: trials must be >= 1");
    }
    std::vector<double> recovered(max_received + 1, 0.0);
    std::vector<double> full(max_received + 1, 0.0);
    for (std::size_t t = 0; t < trials; ++t) {
        const Gf2Matrix rows = source(t);
        if (rows.rows() < max_received || (rows.rows() > 0 && rows.cols() != g)) {
            throw StructuralError("decode_curve: row source returned a short or mis-sized matrix");
        }
        RowSpace space(g);
        for (std::size_t k = 1; k <= max_received; ++k) {
            space.insert(rows.row(k - 1));
            recovered[k] += static_cast<double>(space.unit_count());
            full[k] += space.full() ? 1.0 : 0.0;
        }
    }
    std::vector<CurvePoint> curve;
    curve.reserve(max_received + 1);
    const auto n = static_cast<double>(trials);
    for (std::size_t k = 0; k <= max_received; ++k) {
        curve.push_back({k, recovered[k] / n, full[k] / n});
    }
    return curve;
}

/// Decode curve of the Raptor code described by `params`; trial t re-seeds
/// the code with substream (params.seed, streams::kTrialBase + t).
inline std::vector<CurvePoint> decode_curve(const CodecParams& params, std::size_t max_received,
                                            std::size_t trials) {
    params.validate();
    return decode_curve(params.source_count, max_received, trials, [&](std::size_t t) {
        CodecParams p = params;
        p.seed = substream_state(params.seed, streams::kTrialBase + t);
        return raptor_generator(p, build_precode(p), max_received);
    });
}

}  // namespace cmtlab
