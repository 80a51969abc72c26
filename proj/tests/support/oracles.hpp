#pragma once

#include "emoperf/corpus.hpp"
#include "emoperf/score.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <numeric>
#include <utility>
#include <vector>

namespace emoperf::testing {

// Independent Krumhansl-Schmuckler: correlate the profile against each key, rotating the profile
// to the tonic rather than the reference.
inline std::pair<int, Mode> oracle_key(const score::NoteList& notes) {
    std::array<double, 12> pcp{};
    for (const auto& n : notes.notes) pcp[std::size_t(n.pitch % 12)] += n.duration_beats;
    double best = -2.0;
    std::pair<int, Mode> arg{0, Mode::major};
    for (int tonic = 0; tonic < 12; ++tonic) {
        for (Mode mode : {Mode::major, Mode::minor}) {
            const auto& ref = mode == Mode::major ? score::kMajorProfile : score::kMinorProfile;
            std::array<double, 12> shifted{};
            for (int i = 0; i < 12; ++i) shifted[std::size_t(i)] = pcp[std::size_t((i + tonic) % 12)];
            const double mx = std::accumulate(shifted.begin(), shifted.end(), 0.0) / 12.0;
            const double my = std::accumulate(ref.begin(), ref.end(), 0.0) / 12.0;
            double sxy = 0.0, sxx = 0.0, syy = 0.0;
            for (std::size_t i = 0; i < 12; ++i) {
                sxy += (shifted[i] - mx) * (ref[i] - my);
                sxx += (shifted[i] - mx) * (shifted[i] - mx);
                syy += (ref[i] - my) * (ref[i] - my);
            }
            const double r = sxy / std::sqrt(sxx * syy);
            if (r > best + 1e-12) {
                best = r;
                arg = {tonic, mode};
            }
        }
    }
    return arg;
}

// Exhaustive MCD by bitmask: minimum determinant subset of size h, then the farthest point.
inline std::size_t mcd_oracle(const std::vector<Eigen::Vector2d>& pts) {
    const std::size_t n = pts.size();
    const std::size_t h = (n + 3) / 2 + 1;
    double best = std::numeric_limits<double>::infinity();
    Eigen::Vector2d loc;
    Eigen::Matrix2d cov;
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
        if (std::size_t(__builtin_popcount(mask)) != h) continue;
        Eigen::Vector2d mu = Eigen::Vector2d::Zero();
        for (std::size_t i = 0; i < n; ++i) {
            if (mask >> i & 1u) mu += pts[i];
        }
        mu /= double(h);
        Eigen::Matrix2d s = Eigen::Matrix2d::Zero();
        for (std::size_t i = 0; i < n; ++i) {
            if (mask >> i & 1u) s += (pts[i] - mu) * (pts[i] - mu).transpose();
        }
        s /= double(h - 1);
        const double det = s(0, 0) * s(1, 1) - s(0, 1) * s(1, 0);
        if (det < best) {
            best = det;
            loc = mu;
            cov = s;
        }
    }
    cov += 1e-9 * Eigen::Matrix2d::Identity();
    const Eigen::Matrix2d inv = cov.inverse();
    std::size_t arg = 0;
    double far = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = (pts[i] - loc).dot(inv * (pts[i] - loc));
        if (d > far) {
            far = d;
            arg = i;
        }
    }
    return arg;
}

}  // namespace emoperf::testing
