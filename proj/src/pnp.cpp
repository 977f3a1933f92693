// Copyright 2026-present the tactile360 authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "t360/optics.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>

namespace t360 {

namespace {

using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

// Rotation maximizing sum (R a_i) . b_i for centered point sets.
Mat3 procrustes(const Mat3& cross) {
    Eigen::JacobiSVD<Mat3> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Mat3 d = Mat3::Identity();
    if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0) d(2, 2) = -1.0;
    return svd.matrixU() * d * svd.matrixV().transpose();
}

bool world_degenerate(const std::vector<Vec3>& world) {
    Vec3 mean = Vec3::Zero();
    for (const auto& w : world) mean += w;
    mean /= static_cast<double>(world.size());
    Mat3 cov = Mat3::Zero();
    for (const auto& w : world) cov += (w - mean) * (w - mean).transpose();
    Eigen::SelfAdjointEigenSolver<Mat3> es(cov);
    Vec3 ev = es.eigenvalues();  // ascending
    double scale = std::max(ev[2], 1e-300);
    return ev[2] < 1e-18 || ev[1] < 1e-10 * scale;
}

bool bearings_degenerate(const std::vector<Vec3>& b) {
    for (size_t i = 0; i < b.size(); ++i)
        for (size_t j = i + 1; j < b.size(); ++j)
            if ((b[i] - b[j]).norm() < 1e-9) return true;
    return false;
}

double score_pose(const CameraModel& cam, const CameraPose& pose, const std::vector<Correspondence>& corr,
                  double thr, std::vector<int>* inliers) {
    double sum = 0.0;
    if (inliers) inliers->clear();
    for (size_t i = 0; i < corr.size(); ++i) {
        auto px = try_project(cam, pose.to_camera(corr[i].world));
        if (!px) continue;
        double e = (*px - corr[i].pixel).norm();
        if (e < thr) {
            if (inliers) inliers->push_back(static_cast<int>(i));
            sum += e * e;
        }
    }
    return sum;
}

}  // namespace

std::optional<CameraPose> resect_orthogonal_iteration(const std::vector<Vec3>& bearings,
                                                      const std::vector<Vec3>& world, int max_iterations) {
    const size_t n = world.size();
    if (n < 3 || bearings.size() != n) return std::nullopt;
    if (world_degenerate(world) || bearings_degenerate(bearings)) return std::nullopt;

    std::vector<Mat3> F(n);
    Mat3 sumF = Mat3::Zero();
    for (size_t i = 0; i < n; ++i) {
        Vec3 b = bearings[i].normalized();
        F[i] = b * b.transpose();
        sumF += F[i];
    }
    Mat3 A = Mat3::Identity() - sumF / static_cast<double>(n);
    Eigen::FullPivLU<Mat3> lu(A);
    if (!lu.isInvertible()) return std::nullopt;
    Mat3 tfact = lu.inverse() / static_cast<double>(n);

    Vec3 wmean = Vec3::Zero();
    for (const auto& w : world) wmean += w;
    wmean /= static_cast<double>(n);

    auto optimal_t = [&](const Mat3& R) {
        Vec3 acc = Vec3::Zero();
        for (size_t i = 0; i < n; ++i) acc += (F[i] - Mat3::Identity()) * (R * world[i]);
        return Vec3(tfact * acc);
    };
    auto object_error = [&](const Mat3& R, const Vec3& t) {
        double e = 0.0;
        for (size_t i = 0; i < n; ++i) {
            Vec3 x = R * world[i] + t;
            e += ((Mat3::Identity() - F[i]) * x).squaredNorm();
        }
        return e;
    };
    auto rotation_step = [&](const std::vector<Vec3>& q) {
        Vec3 qmean = Vec3::Zero();
        for (const auto& v : q) qmean += v;
        qmean /= static_cast<double>(n);
        Mat3 cross = Mat3::Zero();
        for (size_t i = 0; i < n; ++i) cross += (q[i] - qmean) * (world[i] - wmean).transpose();
        return procrustes(cross);
    };

    // Initial rotation: align the world points with unit bearings (scale free).
    std::vector<Vec3> q(n);
    for (size_t i = 0; i < n; ++i) q[i] = bearings[i].normalized();
    Mat3 R = rotation_step(q);

    Vec3 t = optimal_t(R);
    double err = object_error(R, t);
    for (int it = 0; it < max_iterations; ++it) {
        for (size_t i = 0; i < n; ++i) q[i] = F[i] * (R * world[i] + t);
        Mat3 Rn = rotation_step(q);
        Vec3 tn = optimal_t(Rn);
        double en = object_error(Rn, tn);
        R = Rn;
        t = tn;
        bool done = std::abs(err - en) <= 1e-14 * std::max(err, 1e-300) || en < 1e-28;
        err = en;
        if (done) break;
    }
    // Depth sign: points must lie in front along their bearings.
    for (size_t i = 0; i < n; ++i)
        if (bearings[i].dot(R * world[i] + t) <= 0.0) return std::nullopt;
    CameraPose pose;
    pose.R = R;
    pose.t = t;
    return pose;
}

CameraPose refine_pose(const CameraModel& cam, const std::vector<Correspondence>& corr, const CameraPose& initial,
                       int max_iterations) {
    if (corr.size() < 3) fail(ErrorCode::InvalidArgument, "pose refinement needs at least 3 correspondences");
    const size_t n = corr.size();
    auto residuals = [&](const CameraPose& pose, Eigen::VectorXd& r) {
        r.resize(static_cast<Eigen::Index>(2 * n));
        for (size_t i = 0; i < n; ++i) {
            auto px = try_project(cam, pose.to_camera(corr[i].world));
            if (!px) return false;
            r[2 * i] = px->x() - corr[i].pixel.x();
            r[2 * i + 1] = px->y() - corr[i].pixel.y();
        }
        return true;
    };
    auto perturb = [](const CameraPose& p, const Vec6& d) {
        CameraPose q;
        q.R = orthonormalize(rotation_exp(d.head<3>()) * p.R);
        q.t = p.t + d.tail<3>();
        return q;
    };

    CameraPose pose = initial;
    Eigen::VectorXd r, rp, rm;
    if (!residuals(pose, r)) fail(ErrorCode::OutOfRange, "initial pose leaves correspondences outside the camera");
    double cost = r.squaredNorm();
    double lambda = 1e-3;
    Eigen::MatrixXd J(static_cast<Eigen::Index>(2 * n), 6);
    bool need_jacobian = true;
    for (int it = 0; it < max_iterations; ++it) {
        if (need_jacobian) {
            for (int k = 0; k < 6; ++k) {
                Vec6 d = Vec6::Zero();
                double h = k < 3 ? 1e-7 : 1e-7 * (1.0 + pose.t.norm());
                d[k] = h;
                bool ok = residuals(perturb(pose, d), rp);
                d[k] = -h;
                ok = residuals(perturb(pose, d), rm) && ok;
                if (!ok) fail(ErrorCode::OutOfRange, "pose refinement left the camera's field of view");
                J.col(k) = (rp - rm) / (2.0 * h);
            }
            need_jacobian = false;
        }
        Mat6 JtJ = J.transpose() * J;
        Vec6 g = J.transpose() * r;
        Mat6 A = JtJ;
        A.diagonal() += lambda * JtJ.diagonal().cwiseMax(1e-12);
        Vec6 step = A.ldlt().solve(-g);
        if (!step.allFinite() || step.norm() < 1e-12) break;
        CameraPose cand = perturb(pose, step);
        Eigen::VectorXd rc;
        if (residuals(cand, rc) && rc.squaredNorm() < cost) {
            pose = cand;
            r = rc;
            cost = rc.squaredNorm();
            lambda = std::max(lambda / 10.0, 1e-12);
            need_jacobian = true;
        } else {
            lambda *= 10.0;
            if (lambda > 1e12) break;
        }
    }
    return pose;
}

PnpResult estimate_pose_pnp(const CameraModel& cam, const std::vector<Correspondence>& corr, const RansacConfig& cfg) {
    if (corr.size() < 4) fail(ErrorCode::InvalidArgument, "PnP needs at least 4 correspondences");
    if (!(cfg.inlier_threshold > 0.0) || cfg.iterations <= 0)
        fail(ErrorCode::InvalidArgument, "RANSAC needs a positive threshold and iteration count");

    std::vector<int> usable;
    std::vector<Vec3> bearing(corr.size());
    for (size_t i = 0; i < corr.size(); ++i) {
        try {
            bearing[i] = unproject(cam, corr[i].pixel);
            usable.push_back(static_cast<int>(i));
        } catch (const Error&) {
        }
    }
    if (usable.size() < 4) fail(ErrorCode::Degenerate, "fewer than 4 correspondences can be unprojected");

    Rng rng(cfg.seed);
    bool have = false;
    CameraPose best;
    size_t best_count = 0;
    double best_sse = std::numeric_limits<double>::infinity();
    std::vector<int> inl;
    std::vector<Vec3> b4(4), w4(4);
    for (int it = 0; it < cfg.iterations; ++it) {
        int idx[4];
        for (int k = 0; k < 4; ++k) {
            bool dup;
            do {
                idx[k] = usable[rng.index(usable.size())];
                dup = false;
                for (int j = 0; j < k; ++j) dup = dup || idx[j] == idx[k];
            } while (dup);
        }
        for (int k = 0; k < 4; ++k) {
            b4[k] = bearing[idx[k]];
            w4[k] = corr[idx[k]].world;
        }
        auto pose = resect_orthogonal_iteration(b4, w4);
        if (!pose) continue;
        double sse = score_pose(cam, *pose, corr, cfg.inlier_threshold, &inl);
        if (inl.size() > best_count || (inl.size() == best_count && inl.size() > 0 && sse < best_sse)) {
            have = true;
            best = *pose;
            best_count = inl.size();
            best_sse = sse;
        }
    }
    if (!have) fail(ErrorCode::Degenerate, "every RANSAC sample was degenerate (collinear or repeated points)");
    if (best_count < 4) fail(ErrorCode::Degenerate, "RANSAC found fewer than 4 inliers");

    PnpResult res;
    res.pose = best;
    score_pose(cam, best, corr, cfg.inlier_threshold, &res.inliers);
    for (int round = 0; round < 4; ++round) {
        std::vector<Correspondence> sub;
        for (int i : res.inliers) sub.push_back(corr[i]);
        CameraPose refined = refine_pose(cam, sub, res.pose);
        std::vector<int> next;
        score_pose(cam, refined, corr, cfg.inlier_threshold, &next);
        if (next.size() < 4) break;
        res.pose = refined;
        bool same = next == res.inliers;
        res.inliers = next;
        if (same) break;
    }
    double sse = score_pose(cam, res.pose, corr, cfg.inlier_threshold, &res.inliers);
    res.inlier_rms = res.inliers.empty() ? 0.0 : std::sqrt(sse / res.inliers.size());
    return res;
}

}  // namespace t360
