#include "mfsmp/noise.hpp"

#include <cmath>
#include <cstring>
#include <numbers>

namespace mfsmp {

namespace {

constexpr std::uint64_t kRoleB1 = 1;
constexpr std::uint64_t kRoleY = 2;
constexpr std::size_t kStorageCap = std::size_t{256} * 512 * 256;

// 64-bit finalizer with full avalanche; chained over the counter fields.
std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t role, std::uint64_t j,
                           std::uint64_t i, std::uint64_t k) {
    std::uint64_t h = mix64(seed ^ 0x6d66736d70ULL);
    h = mix64(h ^ role);
    h = mix64(h ^ (j + 0x51ed2701ULL));
    h = mix64(h ^ (i + 0x2545f491ULL));
    h = mix64(h ^ (k + 0x9d2c5681ULL));
    return h;
}

double uniform_open(std::uint64_t h) {
    // 53-bit mantissa shifted into (0, 1]: never zero, safe under log.
    return static_cast<double>((h >> 11) + 1) * 0x1.0p-53;
}

double uniform_half_open(std::uint64_t h) {
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

}  // namespace

double gaussian_at(std::uint64_t seed, std::uint64_t role, std::uint64_t j, std::uint64_t i,
                   std::uint64_t k) {
    const double u1 = uniform_open(counter_hash(seed, 2 * role, j, i, k));
    const double u2 = uniform_half_open(counter_hash(seed, 2 * role + 1, j, i, k));
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

NoisePlan make_plan(std::uint64_t seed, std::size_t M_outer, std::size_t N_inner,
                    const TimeGrid& grid) {
    if (M_outer == 0 || N_inner == 0)
        throw std::invalid_argument("make_plan: path counts must be positive");
    if (M_outer * N_inner * grid.K > kStorageCap)
        throw std::invalid_argument("make_plan: plan exceeds the storage cap");

    NoisePlan plan;
    plan.seed = seed;
    plan.M_outer = M_outer;
    plan.N_inner = N_inner;
    plan.grid = grid;
    plan.dB1 = Tensor3(M_outer, N_inner, grid.K);
    plan.dY = Tensor2(M_outer, grid.K);

    const double sqrt_dt = std::sqrt(grid.dt());
    for (std::size_t j = 0; j < M_outer; ++j) {
        for (std::size_t i = 0; i < N_inner; ++i)
            for (std::size_t k = 0; k < grid.K; ++k)
                plan.dB1(j, i, k) = sqrt_dt * gaussian_at(seed, kRoleB1, j, i, k);
        for (std::size_t k = 0; k < grid.K; ++k)
            plan.dY(j, k) = sqrt_dt * gaussian_at(seed, kRoleY, j, 0, k);
    }
    return plan;
}

NoisePlan antithetic_extend(const NoisePlan& plan) {
    NoisePlan out;
    out.seed = plan.seed;
    out.M_outer = plan.M_outer;
    out.N_inner = 2 * plan.N_inner;
    out.grid = plan.grid;
    out.dY = plan.dY;
    out.dB1 = Tensor3(plan.M_outer, out.N_inner, plan.grid.K);
    for (std::size_t j = 0; j < plan.M_outer; ++j)
        for (std::size_t i = 0; i < plan.N_inner; ++i)
            for (std::size_t k = 0; k < plan.grid.K; ++k) {
                const double v = plan.dB1(j, i, k);
                out.dB1(j, i, k) = v;
                out.dB1(j, plan.N_inner + i, k) = -v;
            }
    return out;
}

Tensor2 observed_paths(const NoisePlan& plan) {
    Tensor2 y(plan.M_outer, plan.grid.K + 1);
    for (std::size_t j = 0; j < plan.M_outer; ++j) {
        double acc = 0.0;
        y(j, 0) = 0.0;
        for (std::size_t k = 0; k < plan.grid.K; ++k) {
            acc += plan.dY(j, k);
            y(j, k + 1) = acc;
        }
    }
    return y;
}

std::uint64_t plan_content_hash(const NoisePlan& plan) {
    // FNV-1a over the little-endian bytes of each increment, in index order.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto absorb = [&h](double v) {
        std::uint64_t bits;
        static_assert(sizeof(bits) == sizeof(v));
        std::memcpy(&bits, &v, sizeof(bits));
        for (int b = 0; b < 8; ++b) {
            h ^= (bits >> (8 * b)) & 0xffULL;
            h *= 0x100000001b3ULL;
        }
    };
    for (double v : plan.dB1.data()) absorb(v);
    for (double v : plan.dY.data()) absorb(v);
    return h;
}

}  // namespace mfsmp
