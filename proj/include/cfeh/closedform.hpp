// SPDX-License-Identifier: Apache-2.0
//
// cfeh - energy harvesting analysis for cell-free massive MIMO
// Copyright (C) 2026 The cfeh authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef CFEH_CLOSEDFORM_HPP
#define CFEH_CLOSEDFORM_HPP

#include <cfeh/channel.hpp>
#include <cfeh/config.hpp>
#include <cfeh/gaussian_product.hpp>
#include <cfeh/topology.hpp>
#include <cfeh/wpt.hpp>

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace cfeh {

// Notation shared by the formulas below, for UE k listening to the beam of
// UE i at AP l:
//   Z_ikl = g_kl^T conj(ghat_il)          (one-AP inner product)
//   zeta  = sqrt(varsigma_kl varsigma_il), rho = h_kl^T conj(h_il) / N
//   alpha = alpha_ik,l, zero unless i and k share a pilot
// Beam amplitudes a_il = kappa_il sqrt(eta_il) turn these into
//   I_k = sum_i | sum_l a_il Z_ikl |^2.

/// E{Z_ikl} = N (zeta rho + alpha gamma_kl).
inline std::complex<double> quadform_first_moment(std::size_t k, std::size_t i, std::size_t l,
                                                  const LargeScaleModel& ls)
{
    const auto n = static_cast<double>(ls.antennas);
    const double zeta = std::sqrt(ls.varsigma(k, l) * ls.varsigma(i, l));
    const auto rho = los_correlation(ls.phi(k, l), ls.phi(i, l), ls.antennas);
    return n * (zeta * rho + ls.alpha(i, k, l) * ls.gamma(k, l));
}

/// E{|Z_ikl|^2}, the same-AP kernel:
///   N (N zeta^2 |rho|^2 + varsigma_kl gamma_il + beta_kl (varsigma_il + gamma_il)
///      + [i shares k's pilot] gamma_kl (alpha^2 (N+1) gamma_kl + 2 N alpha zeta Re rho - gamma_il)).
/// For i = k this is N (N varsigma^2 + 2 varsigma gamma + (N+1) gamma^2
/// + (varsigma + gamma)(beta - gamma) + 2 N gamma varsigma).
inline double quadform_mean_same_ap(std::size_t k, std::size_t i, std::size_t l, const LargeScaleModel& ls)
{
    const auto n = static_cast<double>(ls.antennas);
    const double zeta = std::sqrt(ls.varsigma(k, l) * ls.varsigma(i, l));
    const auto rho = los_correlation(ls.phi(k, l), ls.phi(i, l), ls.antennas);
    const double gk = ls.gamma(k, l), gi = ls.gamma(i, l);
    double inner = n * zeta * zeta * std::norm(rho) + ls.varsigma(k, l) * gi + ls.beta(k, l) * (ls.varsigma(i, l) + gi);
    if (ls.pilots.shares(i, k)) {
        const double alpha = ls.alpha(i, k, l);
        inner += gk * (alpha * alpha * (n + 1.0) * gk + 2.0 * n * alpha * zeta * rho.real() - gi);
    }
    return n * inner;
}

/// Re E{Z_ikl conj(Z_ikl')} for l != l' (independent APs):
/// N^2 (zeta_l rho_l + alpha_l gamma_kl) conj(zeta_l' rho_l' + alpha_l' gamma_kl').
/// The real part is what survives the symmetric (l, l') + (l', l) sum.
inline double quadform_mean_cross_ap(std::size_t k, std::size_t i, std::size_t l, std::size_t lp,
                                     const LargeScaleModel& ls)
{
    if (l == lp)
        throw std::invalid_argument("quadform_mean_cross_ap: requires two distinct APs");
    return (quadform_first_moment(k, i, l, ls) * std::conj(quadform_first_moment(k, i, lp, ls))).real();
}

/// Mean received RF power per UE.
inline std::vector<double> mean_rf_power(const LargeScaleModel& ls, const PowerControl& pc)
{
    const auto a = beam_amplitudes(ls, pc);
    std::vector<double> out(ls.ues(), 0.0);
    for (std::size_t k = 0; k < ls.ues(); ++k) {
        double total = 0.0;
        for (std::size_t i : pc.served) {
            std::complex<double> coherent = 0.0;
            double spread = 0.0;
            for (std::size_t l = 0; l < ls.aps(); ++l) {
                if (a(i, l) == 0.0)
                    continue;
                const auto mu = quadform_first_moment(k, i, l, ls);
                coherent += a(i, l) * mu;
                spread += a(i, l) * a(i, l) * (quadform_mean_same_ap(k, i, l, ls) - std::norm(mu));
            }
            total += std::norm(coherent) + spread;
        }
        out[k] = total;
    }
    return out;
}

/// Exact variance of I_k split by where its cumulant factors come from.
///
/// coherent: contributions whose cumulant factors all belong to one AP;
/// noncoherent: everything coupling two or more APs. `by_shape` splits the
/// same total by the block sizes of the cumulant partition:
/// {4}, {3,1}, {2,2}, {2,1,1}.
struct RfVarianceTerms {
    double coherent = 0.0;
    double noncoherent = 0.0;
    std::array<double, 4> by_shape{};

    double total() const noexcept { return coherent + noncoherent; }
};

namespace detail {

// Labels 0..3 stand for Y_i, conj(Y_i), Y_j, conj(Y_j); the partitions
// that contribute to Cov(|Y_i|^2, |Y_j|^2) are those with a block that mixes
// {0,1} and {2,3}.
struct CovariancePartition {
    std::vector<unsigned> blocks;
    std::size_t shape;
};

inline const std::vector<CovariancePartition>& covariance_partitions()
{
    static const std::vector<CovariancePartition> parts = [] {
        std::vector<CovariancePartition> out;
        for (const auto& blocks : PartitionTable::instance().of(0b1111u)) {
            bool mixes = false;
            std::size_t largest = 0;
            for (unsigned b : blocks) {
                mixes = mixes || ((b & 0b0011u) && (b & 0b1100u));
                largest = std::max<std::size_t>(largest, static_cast<std::size_t>(std::popcount(b)));
            }
            if (!mixes)
                continue;
            std::size_t shape = 0;
            if (largest == 4)
                shape = 0;
            else if (largest == 3)
                shape = 1;
            else if (blocks.size() == 2)
                shape = 2;
            else
                shape = 3;
            out.push_back({blocks, shape});
        }
        return out;
    }();
    return parts;
}

} // namespace detail

/// Exact variance of the received RF power of every UE.
///
/// Per AP and antenna, with u_p ~ CN(0,1) the normalised projection for
/// pilot p and e_k ~ CN(0,1) independent of all projections,
///   g_kl[t]    = bar g_kl[t] + sqrt(gamma_kl) u_{p(k)} + sqrt(upsilon_kl) e_k
///   ghat_il[t] = bar g_il[t] + sqrt(gamma_il) u_{p(i)}.
/// Antennas and APs are independent, so joint cumulants of
/// (Y_i, conj Y_i, Y_j, conj Y_j) are sums of per-antenna cumulants, which
/// follow exactly from per-antenna moments of products of eight affine
/// Gaussian forms. Cov(|Y_i|^2, |Y_j|^2) is then the sum over the eleven
/// cumulant partitions that couple the two, and Var I_k sums it over (i, j).
inline std::vector<RfVarianceTerms> rf_power_variance_terms(const LargeScaleModel& ls, const PowerControl& pc)
{
    const std::size_t K = ls.ues(), L = ls.aps(), N = ls.antennas;
    const auto a = beam_amplitudes(ls, pc);
    const auto los = los_means(ls);
    const auto& parts = detail::covariance_partitions();

    // Factor layout: 0 G, 1 conj Hi, 2 conj G, 3 Hi, 4 G, 5 conj Hj, 6 conj G, 7 Hj.
    constexpr std::array<unsigned, 4> label_factors = {0x03u, 0x0Cu, 0x30u, 0xC0u};
    using PairList = std::array<std::pair<std::size_t, std::size_t>, 4>;

    std::vector<RfVarianceTerms> out(K);
    GaussianProduct<8> gp;
    std::vector<std::array<std::complex<double>, 16>> per_ap(L);

    for (std::size_t k = 0; k < K; ++k) {
        const std::size_t pk = ls.pilots.pilot_of[k];
        for (std::size_t si = 0; si < pc.served.size(); ++si)
            for (std::size_t sj = si; sj < pc.served.size(); ++sj) {
                const std::size_t i = pc.served[si], j = pc.served[sj];
                const std::size_t pi = ls.pilots.pilot_of[i], pj = ls.pilots.pilot_of[j];

                for (std::size_t l = 0; l < L; ++l) {
                    auto& kl = per_ap[l];
                    kl.fill(0.0);
                    if (a(i, l) == 0.0 || a(j, l) == 0.0)
                        continue;
                    const double gk = ls.gamma(k, l), gi = ls.gamma(i, l), gj = ls.gamma(j, l);
                    gp.clear_pairings();
                    for (std::size_t g : {std::size_t{0}, std::size_t{4}})
                        for (std::size_t gc : {std::size_t{2}, std::size_t{6}})
                            gp.set_pairing(g, gc, ls.beta(k, l));
                    if (pk == pi)
                        for (auto [x, y] : PairList{{{0, 1}, {4, 1}, {3, 2}, {3, 6}}})
                            gp.set_pairing(x, y, std::sqrt(gk * gi));
                    if (pk == pj)
                        for (auto [x, y] : PairList{{{0, 5}, {4, 5}, {7, 2}, {7, 6}}})
                            gp.set_pairing(x, y, std::sqrt(gk * gj));
                    gp.set_pairing(3, 1, gi);
                    gp.set_pairing(7, 5, gj);
                    if (pi == pj) {
                        gp.set_pairing(3, 5, std::sqrt(gi * gj));
                        gp.set_pairing(7, 1, std::sqrt(gi * gj));
                    }

                    const auto mk = los(k, l), mi = los(i, l), mj = los(j, l);
                    for (std::size_t t = 0; t < N; ++t) {
                        gp.set_mean(0, mk[t]);
                        gp.set_mean(1, std::conj(mi[t]));
                        gp.set_mean(2, std::conj(mk[t]));
                        gp.set_mean(3, mi[t]);
                        gp.set_mean(4, mk[t]);
                        gp.set_mean(5, std::conj(mj[t]));
                        gp.set_mean(6, std::conj(mk[t]));
                        gp.set_mean(7, mj[t]);
                        gp.evaluate();
                        std::array<std::complex<double>, 16> m{};
                        for (unsigned s = 1; s < 16; ++s) {
                            unsigned fm = 0;
                            for (unsigned b = 0; b < 4; ++b)
                                if (s & (1u << b))
                                    fm |= label_factors[b];
                            m[s] = gp.moment(fm);
                        }
                        const auto c = cumulants_from_moments(m);
                        for (unsigned s = 1; s < 16; ++s)
                            kl[s] += c[s];
                    }
                    // Amplitudes: labels 0,1 carry a_il, labels 2,3 carry a_jl.
                    for (unsigned s = 1; s < 16; ++s) {
                        const int ni = std::popcount(s & 0b0011u), nj = std::popcount(s & 0b1100u);
                        kl[s] *= std::pow(a(i, l), ni) * std::pow(a(j, l), nj);
                    }
                }

                std::array<std::complex<double>, 16> total{};
                for (std::size_t l = 0; l < L; ++l)
                    for (unsigned s = 1; s < 16; ++s)
                        total[s] += per_ap[l][s];

                const double weight = (si == sj) ? 1.0 : 2.0;
                auto& res = out[k];
                for (const auto& part : parts) {
                    std::complex<double> full = 1.0;
                    for (unsigned b : part.blocks)
                        full *= total[b];
                    std::complex<double> same = 0.0;
                    for (std::size_t l = 0; l < L; ++l) {
                        std::complex<double> p = 1.0;
                        for (unsigned b : part.blocks)
                            p *= per_ap[l][b];
                        same += p;
                    }
                    res.coherent += weight * same.real();
                    res.noncoherent += weight * (full - same).real();
                    res.by_shape[part.shape] += weight * full.real();
                }
            }
    }
    return out;
}

inline std::vector<double> var_rf_power(const LargeScaleModel& ls, const PowerControl& pc)
{
    const auto terms = rf_power_variance_terms(ls, pc);
    std::vector<double> out(terms.size());
    for (std::size_t k = 0; k < terms.size(); ++k)
        out[k] = terms[k].total();
    return out;
}

// Per-beam variance kernels, kept term by term for
// comparison. They sum per-AP-pair variances of a single beam and omit the
// covariances between beams and between AP triples, so they do not equal
// Var I_k in general; var_rf_power() is the exact value.
namespace per_beam {

inline double upsilon_coh(std::size_t k, std::size_t i, std::size_t l, const LargeScaleModel& ls)
{
    const auto n = static_cast<double>(ls.antennas);
    const double al = ls.alpha(i, k, l), a2 = al * al, a4 = a2 * a2;
    const double sk = ls.varsigma(k, l), si = ls.varsigma(i, l);
    const double bk = ls.beta(k, l), gk = ls.gamma(k, l), uk = ls.upsilon(k, l);
    const double z2 = sk * si;
    const double r2 = std::norm(los_correlation(ls.phi(k, l), ls.phi(i, l), ls.antennas));

    const double t1 = 2.0 * n * n * z2 * (n * a2 * sk * r2 * gk + n * bk * r2 * si + a2 * r2 * gk * (bk + n * gk) + a2 * bk * gk);
    const double t2 = n * n * (a4 * sk * sk * gk * gk + bk * bk * si * si);
    const double t3 = 2.0 * a2 * gk * n * (n + 1.0) *
                      (a2 * sk * gk * ((n + 1.0) * gk + bk) + si * ((n - 1.0) * bk * gk + bk * bk + 2.0 * gk * gk));
    const double t4 = n * a4 * gk * gk *
                      ((n + 1.0) * (n + 2.0) * gk * ((n + 3.0) * gk + 4.0 * uk) + uk * uk * (2.0 * n + 1.0) -
                       (bk + n * gk) * (bk + n * gk));
    return t1 + t2 + t3 + t4;
}

inline double upsilon_noncoh(std::size_t k, std::size_t i, std::size_t l, std::size_t lp, const LargeScaleModel& ls)
{
    if (l == lp)
        throw std::invalid_argument("upsilon_noncoh: requires two distinct APs");
    const auto n = static_cast<double>(ls.antennas);
    const double a1 = ls.alpha(i, k, l), a2 = ls.alpha(i, k, lp);
    const double sk1 = ls.varsigma(k, l), sk2 = ls.varsigma(k, lp);
    const double si1 = ls.varsigma(i, l), si2 = ls.varsigma(i, lp);
    const double bk1 = ls.beta(k, l), bk2 = ls.beta(k, lp);
    const double gk1 = ls.gamma(k, l), gk2 = ls.gamma(k, lp);
    const double nu1 = sk1 + gk1, nu2 = sk2 + gk2;
    const double z1 = sk1 * si1, z2 = sk2 * si2; // zeta^2 per AP
    const double r1 = std::norm(los_correlation(ls.phi(k, l), ls.phi(i, l), ls.antennas));
    const double r2 = std::norm(los_correlation(ls.phi(k, lp), ls.phi(i, lp), ls.antennas));
    const double n2 = n * n;

    const double t1 = n2 * r2 * z2 * (a1 * a1 * gk1 * (bk1 + n * nu1) + n * bk1 * si1);
    const double t2 = n2 * r1 * z1 * (a2 * a2 * gk2 * (bk2 + n * nu2) + n * bk2 * si2);
    const double t3 = n2 * a1 * a2 * (bk1 * si1 * gk2 * (bk2 + sk2 + n * gk2) + bk2 * si2 * gk1 * (bk1 + sk1 + n * gk1));
    const double t4 = n2 * bk1 * bk2 * si1 * si2;
    const double t5 = n2 * a1 * a1 * a2 * a2 * gk1 * gk2 *
                      ((sk1 + bk1) * (sk2 + bk2) + n * (gk1 * (bk2 + sk2) + gk2 * (bk1 + sk1)));
    return t1 + t2 + t3 + t4 + t5;
}

/// sum_l sum_i a_il^4 Upsilon^coh + sum_{l != l'} sum_i a_il^2 a_il'^2 Upsilon^noncoh.
inline std::vector<double> var_rf_power(const LargeScaleModel& ls, const PowerControl& pc)
{
    const auto a = beam_amplitudes(ls, pc);
    std::vector<double> out(ls.ues(), 0.0);
    for (std::size_t k = 0; k < ls.ues(); ++k)
        for (std::size_t i : pc.served)
            for (std::size_t l = 0; l < ls.aps(); ++l)
                for (std::size_t lp = 0; lp < ls.aps(); ++lp) {
                    const double w = a(i, l) * a(i, l) * a(i, lp) * a(i, lp);
                    if (w == 0.0)
                        continue;
                    out[k] += w * (l == lp ? upsilon_coh(k, i, l, ls) : upsilon_noncoh(k, i, l, lp, ls));
                }
    return out;
}

} // namespace per_beam

struct LogisticDerivatives {
    double value;
    double first;
    double second;
};

/// Lambda, dLambda/dI = a Lambda (1 - Lambda) and
/// d2Lambda/dI2 = a^2 Lambda (1 - Lambda)(1 - 2 Lambda). The second derivative
/// is positive below the turning point b and negative above it.
inline LogisticDerivatives logistic_derivatives(double x, const EhCircuit& c)
{
    const double v = logistic(x, c);
    const double s = v * (1.0 - v);
    return {v, c.a * s, c.a * c.a * s * (1.0 - 2.0 * v)};
}

/// Mean harvested energy with E{Lambda(I)} ~ Lambda(E{I}).
inline double mean_harvested_energy(double mean_rf, const EhCircuit& c, double seconds)
{
    if (mean_rf < 0.0)
        throw std::invalid_argument("mean_harvested_energy: mean RF power must be >= 0");
    return harvest(mean_rf, c, seconds);
}

enum class VarianceExpansion {
    /// Lambda'^2 Var I: the consistent second-order expansion of Var Lambda(I).
    delta,
    /// (Lambda'^2 + Lambda Lambda'') Var I: expands E{Lambda^2} to second
    /// order but squares the first-order mean.
    mixed_second_order,
};

struct EnergyVariance {
    double value = 0.0;
    bool clamped = false; // the expansion went negative and was clamped to 0
};

inline EnergyVariance var_harvested_energy(double mean_rf, double var_rf, const EhCircuit& c, double seconds,
                                           VarianceExpansion expansion = VarianceExpansion::delta)
{
    if (mean_rf < 0.0 || var_rf < 0.0)
        throw std::invalid_argument("var_harvested_energy: mean and variance must be >= 0");
    const auto d = logistic_derivatives(mean_rf, c);
    double factor = d.first * d.first;
    if (expansion == VarianceExpansion::mixed_second_order)
        factor += d.value * d.second;
    const double scale = seconds * c.psi();
    const double v = scale * scale * var_rf * factor;
    if (v < 0.0)
        return {0.0, true};
    return {v, false};
}

enum class Provenance { analytical, empirical };

struct HarvestStatistics {
    Provenance provenance = Provenance::analytical;
    std::vector<double> mean_rf;
    std::vector<double> var_rf;
    std::vector<double> mean_energy;
    std::vector<double> var_energy;
    std::vector<bool> clamped;
};

inline HarvestStatistics analytical_statistics(const LargeScaleModel& ls, const SystemConfig& cfg,
                                               const PowerControl& pc,
                                               VarianceExpansion expansion = VarianceExpansion::delta)
{
    HarvestStatistics s;
    s.provenance = Provenance::analytical;
    s.mean_rf = mean_rf_power(ls, pc);
    s.var_rf = var_rf_power(ls, pc);
    const std::size_t K = ls.ues();
    s.mean_energy.resize(K);
    s.var_energy.resize(K);
    s.clamped.resize(K);
    for (std::size_t k = 0; k < K; ++k) {
        const auto& circ = cfg.circuit_for(k);
        s.mean_energy[k] = mean_harvested_energy(s.mean_rf[k], circ, cfg.harvest_seconds());
        const auto v = var_harvested_energy(s.mean_rf[k], std::max(0.0, s.var_rf[k]), circ, cfg.harvest_seconds(),
                                            expansion);
        s.var_energy[k] = v.value;
        s.clamped[k] = v.clamped;
    }
    return s;
}

} // namespace cfeh

#endif
