/* SPDX-License-Identifier: Apache-2.0 */
#include <doctest.h>

#include <cmath>

#include "splatpart/avatar.hpp"
#include "splatpart/rng.hpp"

using namespace splatpart;

namespace {

Eigen::Vector4d random_unit_quat(Rng& rng) {
    Eigen::Vector4d q;
    for (int i = 0; i < 4; ++i) {
        q[i] = rng.normal();
    }
    return quat_normalized(q);
}

GaussianComponent random_gaussian(Rng& rng) {
    GaussianComponent g;
    g.mu = Eigen::Vector3d(rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2));
    g.rot = random_unit_quat(rng);
    g.scale = Eigen::Vector3d(rng.uniform(0.01, 3), rng.uniform(0.01, 3),
                              rng.uniform(0.01, 3));
    g.opacity = rng.uniform(0.05, 0.95);
    for (int i = 0; i < kShDim; ++i) {
        g.sh[i] = rng.normal();
    }
    return g;
}

TriangleFrame random_frame(Rng& rng) {
    TriangleFrame f;
    f.R = quat_to_matrix(random_unit_quat(rng));
    f.T = Eigen::Vector3d(rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5));
    f.k = rng.uniform(0.05, 4.0);
    return f;
}

Mesh one_triangle_mesh() {
    Mesh mesh;
    mesh.vertices = {{0, 0, 0}, {2, 0, 0}, {0, 2, 0}};
    mesh.triangles = {{0, 1, 2}};
    return mesh;
}

double max_field_difference(const GaussianComponent& a, const GaussianComponent& b) {
    double m = (a.mu - b.mu).cwiseAbs().maxCoeff();
    // Quaternions are compared up to sign (q and -q encode the same rotation,
    // and a round trip may land on either representative).
    const double qd = std::min((a.rot - b.rot).cwiseAbs().maxCoeff(),
                               (a.rot + b.rot).cwiseAbs().maxCoeff());
    m = std::max(m, qd);
    m = std::max(m, (a.scale - b.scale).cwiseAbs().maxCoeff());
    m = std::max(m, std::abs(a.opacity - b.opacity));
    m = std::max(m, (a.sh - b.sh).cwiseAbs().maxCoeff());
    return m;
}

} // namespace

TEST_CASE("quaternion algebra basics") {
    Rng rng(7);
    const Eigen::Vector4d q = random_unit_quat(rng);
    const Eigen::Vector4d r = random_unit_quat(rng);

    // Identity and inverse.
    const Eigen::Vector4d e(1, 0, 0, 0);
    CHECK((quat_multiply(q, e) - q).cwiseAbs().maxCoeff() < 1e-15);
    CHECK((quat_multiply(e, q) - q).cwiseAbs().maxCoeff() < 1e-15);
    const Eigen::Vector4d qq = quat_multiply(q, quat_conjugate(q));
    CHECK((qq - e).cwiseAbs().maxCoeff() < 1e-12);

    // Rotation composition matches matrix composition.
    const Eigen::Matrix3d Rq = quat_to_matrix(q);
    const Eigen::Matrix3d Rr = quat_to_matrix(r);
    const Eigen::Matrix3d Rqr = quat_to_matrix(quat_multiply(q, r));
    CHECK((Rqr - Rq * Rr).cwiseAbs().maxCoeff() < 1e-12);

    // Matrices produced are proper rotations.
    CHECK(std::abs(Rq.determinant() - 1.0) < 1e-12);
    CHECK((Rq * Rq.transpose() - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() <
          1e-12);

    // Hamilton convention check against the hand-multiplied ij = k identity:
    // (0,1,0,0) * (0,0,1,0) = (0,0,0,1).
    const Eigen::Vector4d i(0, 1, 0, 0), j(0, 0, 1, 0), k(0, 0, 0, 1);
    CHECK((quat_multiply(i, j) - k).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("matrix_to_quat inverts quat_to_matrix across random rotations") {
    Rng rng(21);
    double worst = 0.0;
    for (int n = 0; n < 500; ++n) {
        const Eigen::Vector4d q = random_unit_quat(rng);
        const Eigen::Matrix3d R = quat_to_matrix(q);
        const Eigen::Vector4d back = matrix_to_quat(R);
        CHECK(back[0] >= 0.0); // canonical representative
        const double d = std::min((back - q).cwiseAbs().maxCoeff(),
                                  (back + q).cwiseAbs().maxCoeff());
        worst = std::max(worst, d);
    }
    CHECK(worst < 1e-12);

    // Near-180-degree rotations exercise the trace < 0 branches.
    for (const int axis : {0, 1, 2}) {
        Eigen::Vector4d q = Eigen::Vector4d::Zero();
        q[1 + axis] = 1.0;
        const Eigen::Vector4d back = matrix_to_quat(quat_to_matrix(q));
        const double d = std::min((back - q).cwiseAbs().maxCoeff(),
                                  (back + q).cwiseAbs().maxCoeff());
        CHECK(d < 1e-12);
    }
}

TEST_CASE("triangle_frame produces the documented basis") {
    const Mesh mesh = one_triangle_mesh();
    const TriangleFrame f = triangle_frame(mesh, 0);

    // First edge (2,0,0) normalized; normal +z; cross completes the basis.
    CHECK((f.R.col(0) - Eigen::Vector3d(1, 0, 0)).cwiseAbs().maxCoeff() < 1e-15);
    CHECK((f.R.col(1) - Eigen::Vector3d(0, 0, 1)).cwiseAbs().maxCoeff() < 1e-15);
    CHECK((f.R.col(2) - Eigen::Vector3d(0, -1, 0)).cwiseAbs().maxCoeff() < 1e-15);
    CHECK((f.T - Eigen::Vector3d(2.0 / 3.0, 2.0 / 3.0, 0)).cwiseAbs().maxCoeff() <
          1e-15);
    // Edge lengths 2, 2*sqrt(2), 2.
    CHECK(f.k == doctest::Approx((4.0 + 2.0 * std::sqrt(2.0)) / 3.0).epsilon(1e-14));
    CHECK(std::abs(f.R.determinant() - 1.0) < 1e-14);

    // Degenerate (collinear) triangles are rejected.
    Mesh bad = mesh;
    bad.vertices[2] = Eigen::Vector3d(4, 0, 0);
    CHECK_THROWS_AS(triangle_frame(bad, 0), DegenerateTriangleError);
    CHECK_THROWS_AS(triangle_frame(mesh, 5), InvalidArgumentError);
}

TEST_CASE("local_to_global applies the printed rule") {
    Rng rng(3);
    const TriangleFrame f = random_frame(rng);
    const GaussianComponent g = random_gaussian(rng);

    const GaussianComponent w = local_to_global(g, f);
    CHECK((w.mu - (f.R * g.mu + f.T)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((w.scale - f.k * g.scale).cwiseAbs().maxCoeff() < 1e-12);
    const Eigen::Vector4d expected_rot = quat_multiply(matrix_to_quat(f.R), g.rot);
    CHECK((w.rot - expected_rot).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(w.opacity == g.opacity);
    CHECK((w.sh - g.sh).cwiseAbs().maxCoeff() == 0.0);
    CHECK(w.binding == g.binding);

    // Rotating the mean direction agrees with applying R directly.
    const GaussianComponent w2 = local_to_global(g, f, TransformOptions{true});
    CHECK((w2.mu - (f.k * (f.R * g.mu) + f.T)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((w2.scale - w.scale).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("global/local round trip is identity within 1e-9 on 10000 pairs") {
    Rng rng(1234);
    double worst = 0.0;
    for (int n = 0; n < 10000; ++n) {
        const TriangleFrame f = random_frame(rng);
        const GaussianComponent g = random_gaussian(rng);
        const TransformOptions opts{n % 2 == 1};
        const GaussianComponent back =
            global_to_local(local_to_global(g, f, opts), f, opts);
        worst = std::max(worst, max_field_difference(g, back));

        const GaussianComponent forth =
            local_to_global(global_to_local(g, f, opts), f, opts);
        worst = std::max(worst, max_field_difference(g, forth));
    }
    CHECK(worst < 1e-9);
}

TEST_CASE("to_global_space and to_local_space are inverse on whole avatars") {
    Rng rng(9);
    Mesh mesh;
    // A small fan of eight irregular triangles.
    mesh.vertices.push_back(Eigen::Vector3d(0, 0, 0));
    for (int i = 0; i <= 8; ++i) {
        const double a = 0.3 + 0.6 * i;
        mesh.vertices.push_back(
            Eigen::Vector3d(std::cos(a), std::sin(a), 0.1 * i));
    }
    for (int i = 0; i < 8; ++i) {
        mesh.triangles.push_back({0, i + 1, i + 2});
    }

    Avatar avatar;
    avatar.mesh = mesh;
    avatar.space = CoordinateSpace::Local;
    for (int n = 0; n < 64; ++n) {
        GaussianComponent g = random_gaussian(rng);
        g.mu *= 0.05;
        g.scale *= 0.02;
        g.binding = n % 8;
        avatar.gaussians.push_back(g);
    }

    const Avatar global = to_global_space(avatar);
    CHECK(global.space == CoordinateSpace::Global);
    CHECK(to_global_space(global).gaussians[0].mu == global.gaussians[0].mu); // no-op

    const Avatar back = to_local_space(global);
    CHECK(back.space == CoordinateSpace::Local);
    REQUIRE(back.size() == avatar.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < avatar.size(); ++i) {
        worst = std::max(worst,
                         max_field_difference(avatar.gaussians[i], back.gaussians[i]));
    }
    CHECK(worst < 1e-9);

    // Frames transform each gaussian by its own parent triangle.
    const std::vector<TriangleFrame> frames = build_frames(mesh);
    for (std::size_t i = 0; i < avatar.size(); ++i) {
        const GaussianComponent expect =
            local_to_global(avatar.gaussians[i], frames[avatar.gaussians[i].binding]);
        CHECK((global.gaussians[i].mu - expect.mu).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("validate_avatar names the first violation") {
    Avatar avatar;
    avatar.mesh = one_triangle_mesh();
    avatar.gaussians.push_back(GaussianComponent{});
    CHECK_NOTHROW(validate_avatar(avatar));

    Avatar bad = avatar;
    bad.gaussians[0].binding = 3;
    CHECK_THROWS_AS(validate_avatar(bad), InvalidArgumentError);

    bad = avatar;
    bad.gaussians[0].scale[1] = 0.0;
    CHECK_THROWS_AS(validate_avatar(bad), InvalidArgumentError);

    bad = avatar;
    bad.gaussians[0].opacity = 1.0;
    CHECK_THROWS_AS(validate_avatar(bad), InvalidArgumentError);

    bad = avatar;
    bad.gaussians[0].rot *= 3.0;
    CHECK_THROWS_AS(validate_avatar(bad), InvalidArgumentError);
}
