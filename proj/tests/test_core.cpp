#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "dtwin/core.hpp"
#include "test_util.hpp"

using namespace dtwin;
using testutil::random_embedding;

namespace {

EmbeddingVector vec2(double a, double b, EmbeddingKind kind = EmbeddingKind::expression) {
    EmbeddingVector v;
    v.kind = kind;
    v.values = {a, b};
    return v;
}

}  // namespace

TEST_CASE("validate_clip accepts a well-formed clip") {
    const auto clip = testutil::trivial_clip(3);
    CHECK(validate_clip(clip).empty());
}

TEST_CASE("validate_clip reports inconsistent frame dimensions") {
    auto clip = testutil::trivial_clip(3);
    clip.frames[2] = testutil::flat_frame(32, 64, 0.5f, 2);
    const auto violations = validate_clip(clip);
    REQUIRE_FALSE(violations.empty());
    CHECK(violations.front() == "inconsistent frame dimensions");
}

TEST_CASE("validate_clip reports an empty clip") {
    VideoClip clip;
    clip.fps = 25.0;
    const auto violations = validate_clip(clip);
    REQUIRE_FALSE(violations.empty());
    CHECK(violations.front() == "empty clip");
}

TEST_CASE("validate_clip reports non-positive fps and bad pixel values") {
    auto clip = testutil::trivial_clip(1);
    clip.fps = 0.0;
    clip.frames[0].pixels[0] = 1.5f;
    const auto violations = validate_clip(clip);
    CHECK(violations.size() == 2);
}

TEST_CASE("embedding_distance on the spec examples") {
    CHECK(embedding_distance(vec2(1, 0), vec2(1, 0), DistanceMetric::cosine) ==
          doctest::Approx(0.0).epsilon(1e-12));
    CHECK(embedding_distance(vec2(1, 0), vec2(0, 1), DistanceMetric::euclidean) ==
          doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    CHECK(embedding_distance(vec2(1, 0), vec2(-1, 0), DistanceMetric::cosine) ==
          doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("embedding_distance rejects kind and dimension mismatches") {
    CHECK_THROWS_AS(embedding_distance(vec2(1, 0, EmbeddingKind::identity), vec2(1, 0),
                                       DistanceMetric::cosine),
                    KindMismatchError);
    auto a = vec2(1, 0);
    auto b = a;
    b.values.push_back(0.0);
    CHECK_THROWS_AS(embedding_distance(a, b, DistanceMetric::euclidean),
                    KindMismatchError);
    CHECK_THROWS_AS(embedding_distance(vec2(0, 0), vec2(1, 0), DistanceMetric::cosine),
                    ZeroVectorError);
}

TEST_CASE("l2_normalize on the 3-4-5 triangle and error path") {
    EmbeddingVector v;
    v.kind = EmbeddingKind::expression;
    v.values = {3, 4, 0};
    const auto n = l2_normalize(v);
    CHECK(n.values[0] == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(n.values[1] == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(n.values[2] == 0.0);

    v.values = {0, 0, 0};
    CHECK_THROWS_AS(l2_normalize(v), ZeroVectorError);
}

TEST_CASE("distance properties over random vectors") {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 2000; ++i) {
        const auto a = random_embedding(EmbeddingKind::expression, rng);
        const auto b = random_embedding(EmbeddingKind::expression, rng);
        for (const auto metric : {DistanceMetric::cosine, DistanceMetric::euclidean}) {
            const double ab = embedding_distance(a, b, metric);
            const double ba = embedding_distance(b, a, metric);
            CHECK(std::abs(ab - ba) < 1e-12);
            CHECK(ab >= 0.0);
            CHECK(embedding_distance(a, a, metric) < 1e-12);
        }
        const double cos = embedding_distance(a, b, DistanceMetric::cosine);
        CHECK(cos <= 2.0);

        // positive scaling invariance for cosine
        auto scaled = a;
        std::uniform_real_distribution<double> scale(0.01, 50.0);
        const double alpha = scale(rng);
        for (auto& x : scaled.values) x *= alpha;
        CHECK(std::abs(embedding_distance(scaled, b, DistanceMetric::cosine) - cos) < 1e-9);
    }
}

TEST_CASE("euclidean distance satisfies the triangle inequality") {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 2000; ++i) {
        const auto a = random_embedding(EmbeddingKind::expression, rng);
        const auto b = random_embedding(EmbeddingKind::expression, rng);
        const auto c = random_embedding(EmbeddingKind::expression, rng);
        const double ab = embedding_distance(a, b, DistanceMetric::euclidean);
        const double bc = embedding_distance(b, c, DistanceMetric::euclidean);
        const double ac = embedding_distance(a, c, DistanceMetric::euclidean);
        CHECK(ac <= ab + bc + 1e-9);
    }
}

TEST_CASE("l2_normalize is idempotent") {
    std::mt19937_64 rng(13);
    for (int i = 0; i < 200; ++i) {
        const auto v = random_embedding(EmbeddingKind::identity, rng);
        const auto once = l2_normalize(v);
        const auto twice = l2_normalize(once);
        for (int j = 0; j < once.dim(); ++j) {
            CHECK(std::abs(once.values[j] - twice.values[j]) < 1e-9);
        }
        double norm = 0.0;
        for (double x : once.values) norm += x * x;
        CHECK(std::abs(std::sqrt(norm) - 1.0) < 1e-9);
    }
}

TEST_CASE("check_embedding enforces dimension by kind") {
    EmbeddingVector v;
    v.kind = EmbeddingKind::identity;
    v.values.assign(kIdentityDim, 0.1);
    CHECK_NOTHROW(check_embedding(v));
    v.values.pop_back();
    CHECK_THROWS_AS(check_embedding(v), Error);
}
