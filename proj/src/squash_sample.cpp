#include "siqrng/squash_sample.hpp"

#include <cmath>
#include <stdexcept>

namespace siqrng {

SquashedOutcome squash(const ClickEvent& event, SeedStream& double_click_seed) {
    switch (event.pattern) {
        case ClickPattern::none:
            return {OutcomeKind::vacuum, 0, false};
        case ClickPattern::d0:
            return {OutcomeKind::bit, 0, false};
        case ClickPattern::d1:
            return {OutcomeKind::bit, 1, false};
        case ClickPattern::both:
            if (event.basis == Basis::X) {
                return {OutcomeKind::double_click, 0, false};
            }
            return {OutcomeKind::bit, static_cast<std::uint8_t>(double_click_seed.next_bit() ? 1 : 0), true};
    }
    throw std::invalid_argument("unknown click pattern");
}

bool SessionTally::consistent() const {
    return n == n_x + n_z && x_minus + x_double <= n_x && z_bits.size() == n_z && z_double <= n_z;
}

namespace {

void fold(SessionTally& t, Basis basis, const SquashedOutcome& o) {
    if (o.kind == OutcomeKind::vacuum) {
        return;
    }
    ++t.n;
    if (basis == Basis::X) {
        ++t.n_x;
        if (o.kind == OutcomeKind::double_click) {
            ++t.x_double;
        } else if (o.bit == 1) {
            ++t.x_minus;
        }
        return;
    }
    if (o.kind == OutcomeKind::double_click) {
        throw std::invalid_argument("a Z double click must be squashed to a bit before tallying");
    }
    ++t.n_z;
    t.z_bits.push_back(o.bit == 1);
    if (o.seed_assigned) {
        ++t.z_double;
        ++t.seed_bits_consumed;
    }
}

}  // namespace

SessionTally tally_session(std::span<const SquashedEvent> events) {
    SessionTally t;
    for (const auto& e : events) {
        fold(t, e.basis, e.outcome);
    }
    return t;
}

SessionTally squash_and_tally(const ClickStream& clicks, SeedStream& double_click_seed) {
    SessionTally t;
    for (std::size_t i = 0; i < clicks.size(); ++i) {
        const auto ev = clicks[i];
        fold(t, ev.basis, squash(ev, double_click_seed));
    }
    return t;
}

SessionTally merge_tallies(SessionTally a, const SessionTally& b) {
    a.n += b.n;
    a.n_x += b.n_x;
    a.n_z += b.n_z;
    a.x_minus += b.x_minus;
    a.x_double += b.x_double;
    a.z_double += b.z_double;
    a.seed_bits_consumed += b.seed_bits_consumed;
    a.z_bits.append(b.z_bits);
    return a;
}

mpz_class binomial(std::uint64_t n, std::uint64_t k) {
    mpz_class out;
    if (k > n) {
        return out;
    }
    static_assert(sizeof(unsigned long) == 8, "GMP ui functions must take 64-bit arguments");
    mpz_bin_uiui(out.get_mpz_t(), n, k);
    return out;
}

namespace {

/// Product of the integers in [lo, hi]; 1 for an empty range.
mpz_class range_product(std::uint64_t lo, std::uint64_t hi) {
    if (lo > hi) {
        return 1;
    }
    if (hi - lo < 16) {
        mpz_class p = lo;
        for (std::uint64_t i = lo + 1; i <= hi; ++i) {
            mpz_mul_ui(p.get_mpz_t(), p.get_mpz_t(), i);
        }
        return p;
    }
    const std::uint64_t mid = lo + (hi - lo) / 2;
    return range_product(lo, mid) * range_product(mid + 1, hi);
}

/// log2 C(c, r) for c >= r.
double log2_binomial(std::uint64_t c, std::uint64_t r) {
    const double nats = std::lgamma(static_cast<double>(c) + 1.0) - std::lgamma(static_cast<double>(c - r) + 1.0) -
                        std::lgamma(static_cast<double>(r) + 1.0);
    return nats / std::log(2.0);
}

double log2_of(const mpz_class& x) {
    long exp = 0;
    const double mant = mpz_get_d_2exp(&exp, x.get_mpz_t());
    return std::log2(mant) + static_cast<double>(exp);
}

// C(c-1, r) from C(c, r).
void step_down(mpz_class& b, std::uint64_t& c, std::uint64_t r) {
    mpz_mul_ui(b.get_mpz_t(), b.get_mpz_t(), c - r);
    mpz_divexact_ui(b.get_mpz_t(), b.get_mpz_t(), c);
    --c;
}

constexpr int kLinearSteps = 16;

/**
 * Given b == C(c, r) > x, move (c, b) down to the largest c' < c with
 * C(c', r) <= x. Exact: the float estimate only chooses where to land.
 */
void descend(mpz_class& b, std::uint64_t& c, std::uint64_t r, const mpz_class& x) {
    for (int s = 0; s < kLinearSteps; ++s) {
        step_down(b, c, r);
        if (b <= x) {
            return;
        }
    }
    if (x == 0) {
        // C(c', r) is zero exactly when c' < r.
        c = r - 1;
        b = 0;
        return;
    }
    // x >= 1 = C(r, r), so the answer lies in [r, c - 1].
    const std::uint64_t ceiling = c;
    const double target = log2_of(x);
    std::uint64_t lo = r;
    std::uint64_t hi = c - 1;
    while (lo < hi) {
        const std::uint64_t mid = lo + (hi - lo + 1) / 2;
        if (log2_binomial(mid, r) <= target) {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    const std::uint64_t estimate = lo;
    const std::uint64_t gap = c - estimate;
    if (gap > r) {
        b = binomial(estimate, r);
    } else {
        // C(e, r) = C(c, r) * prod_{i=e+1..c} (i - r) / i
        const mpz_class num = range_product(estimate + 1 - r, c - r);
        const mpz_class den = range_product(estimate + 1, c);
        b *= num;
        mpz_divexact(b.get_mpz_t(), b.get_mpz_t(), den.get_mpz_t());
    }
    c = estimate;
    while (b > x) {
        step_down(b, c, r);
    }
    mpz_class up;
    while (c + 1 < ceiling) {
        // C(c+1, r) = C(c, r) * (c + 1) / (c + 1 - r)
        mpz_mul_ui(up.get_mpz_t(), b.get_mpz_t(), c + 1);
        mpz_divexact_ui(up.get_mpz_t(), up.get_mpz_t(), c + 1 - r);
        if (up > x) {
            break;
        }
        b = up;
        ++c;
    }
}

}  // namespace

std::vector<std::uint64_t> unrank_combination(const mpz_class& index, std::uint64_t N, std::uint64_t k) {
    if (k > N) {
        throw std::out_of_range("cannot choose more positions than available");
    }
    const mpz_class total = binomial(N, k);
    if (index < 0 || index >= total) {
        throw std::out_of_range("combination index outside [0, C(N,k))");
    }
    std::vector<std::uint64_t> out;
    out.reserve(k);
    if (k == 0) {
        return out;
    }
    // Lexicographic rank R maps to the combinadic X = C(N,k) - 1 - R whose
    // greedy digits c_i give positions N - 1 - c_i in increasing order.
    mpz_class x = total - 1 - index;
    std::uint64_t c = N - 1;
    std::uint64_t r = k;
    mpz_class b = total;
    mpz_mul_ui(b.get_mpz_t(), b.get_mpz_t(), N - k);
    mpz_divexact_ui(b.get_mpz_t(), b.get_mpz_t(), N);  // C(N-1, k)
    while (true) {
        if (b > x) {
            descend(b, c, r, x);
        }
        out.push_back(N - 1 - c);
        x -= b;
        if (r == 1) {
            break;
        }
        // C(c-1, r-1) = C(c, r) * r / c
        mpz_mul_ui(b.get_mpz_t(), b.get_mpz_t(), r);
        mpz_divexact_ui(b.get_mpz_t(), b.get_mpz_t(), c);
        --c;
        --r;
    }
    return out;
}

std::uint64_t seed_length_required(std::uint64_t N, std::uint64_t N_x) {
    if (N_x > N) {
        throw std::invalid_argument("N_x must not exceed N");
    }
    const mpz_class count = binomial(N, N_x);
    if (count <= 1) {
        return 0;
    }
    const mpz_class top = count - 1;
    return mpz_sizeinbase(top.get_mpz_t(), 2);
}

mpz_class window_value(const BitBlock& window) {
    mpz_class value;
    if (window.empty()) {
        return value;
    }
    const BitBlock lsb_first = window.reversed();
    const auto words = lsb_first.words();
    mpz_import(value.get_mpz_t(), words.size(), -1, sizeof(std::uint64_t), 0, 0, words.data());
    return value;
}

BasisPlan plan_basis_positions(std::uint64_t N, std::uint64_t N_x, SeedStream& seed) {
    if (N_x > N) {
        throw std::invalid_argument("N_x must not exceed N");
    }
    BasisPlan plan;
    const std::uint64_t bits = seed_length_required(N, N_x);
    if (bits == 0) {
        plan.x_positions.resize(N_x);
        for (std::uint64_t i = 0; i < N_x; ++i) {
            plan.x_positions[i] = i;
        }
        return plan;
    }
    const mpz_class count = binomial(N, N_x);
    const std::uint64_t start = seed.consumed();
    while (true) {
        const mpz_class value = window_value(seed.take(bits));
        ++plan.windows;
        if (value < count) {
            plan.x_positions = unrank_combination(value, N, N_x);
            break;
        }
    }
    plan.seed_bits_consumed = seed.consumed() - start;
    return plan;
}

BasisPlan plan_basis_positions(std::uint64_t N, std::uint64_t N_x, const BitBlock& seed) {
    SeedStream stream(seed);
    return plan_basis_positions(N, N_x, stream);
}

}  // namespace siqrng
