#include <doctest.h>

#include <algorithm>
#include <random>
#include <vector>

#include "maskbench/core/rng.hpp"
#include "maskbench/metrics/curves.hpp"
#include "maskbench/metrics/evaluate.hpp"
#include "maskbench/metrics/map.hpp"
#include "maskbench/metrics/matching.hpp"
#include "maskbench/metrics/metrics.hpp"
#include "maskbench/raster/ops.hpp"

using namespace maskbench;
using raster::BBox;
using raster::BinaryMask;

namespace {

BinaryMask random_mask(std::mt19937_64& rng, int width, int height, double density) {
    BinaryMask mask(width, height);
    for (auto& px : mask.data()) {
        px = rand_unit(rng) < density ? 1 : 0;
    }
    return mask;
}

struct BruteCounts {
    std::uint64_t inter = 0, a = 0, b = 0;
    std::uint64_t uni() const { return a + b - inter; }
};

BruteCounts brute_counts(const BinaryMask& pred, const BinaryMask& gt) {
    BruteCounts counts;
    for (int row = 0; row < pred.height(); ++row) {
        for (int col = 0; col < pred.width(); ++col) {
            counts.a += pred.at(row, col);
            counts.b += gt.at(row, col);
            if (pred.at(row, col) && gt.at(row, col)) ++counts.inter;
        }
    }
    return counts;
}

dataset::GtInstance make_gt_rect(std::int64_t instance_id, std::int64_t image_id, double x,
                                 double y, double w, double h) {
    dataset::GtInstance inst;
    inst.instance_id = instance_id;
    inst.image_id = image_id;
    inst.bbox = {x, y, w, h};
    inst.polygons = {{{{x, y}, {x + w, y}, {x + w, y + h}, {x, y + h}}}};
    return inst;
}

dataset::Detection make_detection(std::int64_t image_id, double x, double y, double w, double h,
                                  double score) {
    return {image_id, {x, y, w, h}, score};
}

// From-scratch 101-point AP for one threshold: greedy matching over the score
// ranking, then a direct max-scan per recall point instead of the envelope
// recurrence the implementation uses.
double ap_reference(const std::vector<dataset::Detection>& detections,
                    const std::vector<dataset::GtInstance>& gts, double threshold) {
    std::vector<std::size_t> order(detections.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t lhs, std::size_t rhs) {
        return detections[lhs].score > detections[rhs].score;
    });

    std::vector<bool> taken(gts.size(), false);
    std::vector<double> precision, recall;
    std::size_t tp = 0;
    for (std::size_t rank = 0; rank < order.size(); ++rank) {
        const dataset::Detection& det = detections[order[rank]];
        std::size_t best = gts.size();
        double best_iou = -1.0;
        for (std::size_t g = 0; g < gts.size(); ++g) {
            if (taken[g]) continue;
            double iou = metrics::box_iou(det.bbox, gts[g].bbox);
            if (iou < threshold) continue;
            bool better = iou > best_iou ||
                          (iou == best_iou && best < gts.size() &&
                           gts[g].instance_id < gts[best].instance_id);
            if (best == gts.size() || better) {
                best = g;
                best_iou = iou;
            }
        }
        if (best < gts.size()) {
            taken[best] = true;
            ++tp;
        }
        precision.push_back(static_cast<double>(tp) / static_cast<double>(rank + 1));
        recall.push_back(static_cast<double>(tp) / static_cast<double>(gts.size()));
    }

    double sum = 0.0;
    for (int j = 0; j <= 100; ++j) {
        double r = j / 100.0;
        double best_p = 0.0;
        for (std::size_t k = 0; k < precision.size(); ++k) {
            if (recall[k] >= r) best_p = std::max(best_p, precision[k]);
        }
        sum += best_p;
    }
    return sum / 101.0;
}

} // namespace

TEST_CASE("mask metrics on a hand-counted pair") {
    // pred = cols 0..1, gt = cols 1..2 of a 1x4 strip: inter 1, union 3.
    BinaryMask pred(4, 1), gt(4, 1);
    pred.set(0, 0, 1);
    pred.set(0, 1, 1);
    gt.set(0, 1, 1);
    gt.set(0, 2, 1);

    CHECK(metrics::mask_iou(pred, gt) == 1.0 / 3.0);
    CHECK(metrics::dice(pred, gt) == 2.0 / 4.0);
    auto [precision, recall] = metrics::pixel_precision_recall(pred, gt);
    CHECK(precision == 1.0 / 2.0);
    CHECK(recall == 1.0 / 2.0);
}

TEST_CASE("mask metrics refuse empty denominators") {
    BinaryMask empty(4, 4), full(4, 4);
    for (auto& px : full.data()) px = 1;

    CHECK_THROWS_AS(metrics::mask_iou(empty, empty), UndefinedMetricError);
    CHECK_THROWS_AS(metrics::dice(empty, empty), UndefinedMetricError);
    CHECK_THROWS_AS(metrics::pixel_precision_recall(empty, full), UndefinedMetricError);
    CHECK_THROWS_AS(metrics::pixel_precision_recall(full, empty), UndefinedMetricError);
    BinaryMask other(5, 5);
    CHECK_THROWS_AS(metrics::mask_iou(full, other), ShapeError);
}

TEST_CASE("dice and IoU satisfy the exact rational identity") {
    // dice = 2I/(A+B) and iou = I/U agree with dice = 2·iou/(1+iou) exactly
    // when A + B == U + I; verify in integers, then verify the doubles are the
    // very divisions of those integers.
    std::mt19937_64 rng(404);
    for (int trial = 0; trial < 200; ++trial) {
        BinaryMask pred = random_mask(rng, 19, 13, 0.15 + 0.08 * (trial % 10));
        BinaryMask gt = random_mask(rng, 19, 13, 0.15 + 0.08 * ((trial + 3) % 10));
        BruteCounts counts = brute_counts(pred, gt);
        if (counts.uni() == 0) continue;

        REQUIRE(counts.a + counts.b == counts.uni() + counts.inter);
        REQUIRE(metrics::mask_iou(pred, gt) ==
                static_cast<double>(counts.inter) / static_cast<double>(counts.uni()));
        if (counts.a + counts.b > 0) {
            REQUIRE(metrics::dice(pred, gt) == 2.0 * static_cast<double>(counts.inter) /
                                                   static_cast<double>(counts.a + counts.b));
        }
    }
}

TEST_CASE("relaxed IoU forgives a fixed-size boundary offset") {
    // Two single pixels two columns apart: disjoint at radius 0, overlapping
    // once dilated. 1x5 image keeps the arithmetic countable by hand.
    BinaryMask a(5, 1), b(5, 1);
    a.set(0, 0, 1);
    b.set(0, 2, 1);
    CHECK(metrics::relaxed_iou(a, b, 0) == 0.0);
    // dilated: a covers cols {0,1}, b covers {1,2,3}; inter 1, union 4.
    CHECK(metrics::relaxed_iou(a, b, 1) == 1.0 / 4.0);
    // radius 2: a covers {0,1,2}, b covers {0..4}; inter 3, union 5.
    CHECK(metrics::relaxed_iou(a, b, 2) == 3.0 / 5.0);
}

TEST_CASE("box IoU on the shifted-rectangle closed form") {
    // 8x4 boxes offset horizontally by 2: intersection 6x4, union 10x4.
    CHECK(metrics::box_iou(BBox{0, 0, 8, 4}, BBox{2, 0, 8, 4}) == 0.6);
    CHECK(metrics::box_iou(BBox{0, 0, 8, 4}, BBox{0, 0, 8, 4}) == 1.0);
    // Touching edges share no area.
    CHECK(metrics::box_iou(BBox{0, 0, 4, 4}, BBox{4, 0, 4, 4}) == 0.0);
    CHECK(metrics::box_iou(BBox{0, 0, 4, 4}, BBox{10, 10, 4, 4}) == 0.0);
    CHECK_THROWS_AS(metrics::box_iou(BBox{0, 0, 0, 4}, BBox{0, 0, 4, 4}), ShapeError);
}

TEST_CASE("greedy matching follows score order and breaks ties toward lower ids") {
    std::vector<dataset::GtInstance> gts = {
        make_gt_rect(11, 1, 0, 0, 8, 4),
        make_gt_rect(12, 1, 20, 0, 8, 4),
        make_gt_rect(13, 1, 40, 0, 8, 4),
    };
    std::vector<dataset::Detection> detections = {
        make_detection(1, 20, 0, 8, 4, 0.7), // exact hit on 12
        make_detection(1, 2, 0, 8, 4, 0.9),  // IoU 0.6 with 11
        make_detection(1, 60, 0, 8, 4, 0.8), // far from everything
    };
    metrics::MatchSet ms = metrics::match_instances(detections, gts, 0.5);

    REQUIRE(ms.pairs.size() == 2);
    // Highest score first: detection 1 claims GT 11, then detection 2 is too
    // far, then detection 0 claims GT 12.
    CHECK(ms.pairs[0].gt_instance_id == 11);
    CHECK(ms.pairs[0].detection_index == 1);
    CHECK(ms.pairs[0].box_iou == 0.6);
    CHECK(ms.pairs[1].gt_instance_id == 12);
    CHECK(ms.pairs[1].detection_index == 0);
    CHECK(ms.unmatched_gt == std::vector<std::int64_t>{13});
    CHECK(ms.unmatched_detections == std::vector<std::size_t>{2});
    CHECK(ms.iou_threshold == 0.5);
}

TEST_CASE("matching threshold is inclusive and ties prefer the lower instance id") {
    // One detection equidistant between two GT boxes: IoU exactly 0.6 to both.
    std::vector<dataset::GtInstance> gts = {
        make_gt_rect(22, 1, 4, 0, 8, 4),
        make_gt_rect(21, 1, 0, 0, 8, 4),
    };
    std::vector<dataset::Detection> detections = {make_detection(1, 2, 0, 8, 4, 0.9)};

    metrics::MatchSet at_exact = metrics::match_instances(detections, gts, 0.6);
    REQUIRE(at_exact.pairs.size() == 1); // 0.6 >= 0.6 matches
    CHECK(at_exact.pairs[0].gt_instance_id == 21);

    metrics::MatchSet above = metrics::match_instances(detections, gts, 0.601);
    CHECK(above.pairs.empty());
}

TEST_CASE("matching validates its inputs") {
    std::vector<dataset::GtInstance> gts = {make_gt_rect(1, 1, 0, 0, 4, 4)};
    std::vector<dataset::Detection> detections = {make_detection(2, 0, 0, 4, 4, 0.9)};
    CHECK_THROWS_AS(metrics::match_instances(detections, gts, 0.5), ReferentialIntegrityError);
    CHECK_THROWS_AS(metrics::match_instances({}, gts, 1.5), ConfigError);
    CHECK_THROWS_AS(metrics::match_instances({}, gts, -0.1), ConfigError);
}

TEST_CASE("detection rate pools matched over total ground truth") {
    std::vector<dataset::GtInstance> gts1 = {make_gt_rect(1, 1, 0, 0, 8, 4),
                                             make_gt_rect(2, 1, 20, 0, 8, 4)};
    std::vector<dataset::GtInstance> gts2 = {make_gt_rect(3, 2, 0, 0, 8, 4)};
    std::vector<metrics::MatchSet> sets = {
        metrics::match_instances({make_detection(1, 0, 0, 8, 4, 0.9)}, gts1, 0.5),
        metrics::match_instances({}, gts2, 0.5),
    };
    CHECK(metrics::detection_rate(sets) == 1.0 / 3.0);
    CHECK_THROWS_AS(metrics::detection_rate({}), UndefinedMetricError);
}

TEST_CASE("threshold grids are built from integer ratios") {
    metrics::ThresholdGrid coco = metrics::ThresholdGrid::coco();
    REQUIRE(coco.thresholds.size() == 10);
    CHECK(coco.thresholds.front() == 50 / 100.0);
    CHECK(coco.thresholds[2] == 60 / 100.0);
    CHECK(coco.thresholds.back() == 95 / 100.0);

    metrics::ThresholdGrid fine = metrics::ThresholdGrid::uniform(20);
    REQUIRE(fine.thresholds.size() == 21);
    CHECK(fine.thresholds.front() == 0.0);
    CHECK(fine.thresholds[10] == 10 / 20.0);
    CHECK(fine.thresholds.back() == 1.0);

    CHECK_THROWS_AS(metrics::ThresholdGrid::uniform(0), ConfigError);
    metrics::ThresholdGrid bad{{0.5, 0.5}};
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("single detection at IoU 0.6 scores mAP 0.3 on the COCO grid") {
    std::map<std::int64_t, std::vector<dataset::Detection>> detections;
    std::map<std::int64_t, std::vector<dataset::GtInstance>> gts;
    gts[1] = {make_gt_rect(1, 1, 0, 0, 8, 4)};
    detections[1] = {make_detection(1, 2, 0, 8, 4, 0.9)};

    metrics::MapResult result = metrics::coco_map(detections, gts, metrics::ThresholdGrid::coco());
    REQUIRE(result.ap_per_threshold.size() == 10);
    // AP is exactly 1 at t in {0.50, 0.55, 0.60} and 0 beyond.
    for (const auto& [threshold, ap] : result.ap_per_threshold) {
        CHECK(ap == (threshold <= 0.6 ? 1.0 : 0.0));
    }
    CHECK(result.map == 0.3);
}

TEST_CASE("mAP with no ground truth is undefined, with no detections is zero") {
    std::map<std::int64_t, std::vector<dataset::GtInstance>> gts;
    std::map<std::int64_t, std::vector<dataset::Detection>> detections;
    CHECK_THROWS_AS(metrics::coco_map(detections, gts, metrics::ThresholdGrid::coco()),
                    UndefinedMetricError);

    gts[1] = {make_gt_rect(1, 1, 0, 0, 8, 4)};
    metrics::MapResult result = metrics::coco_map(detections, gts, metrics::ThresholdGrid::coco());
    CHECK(result.map == 0.0);
}

TEST_CASE("mAP matches a from-scratch single-image oracle on random scenarios") {
    std::mt19937_64 rng(505);
    for (int trial = 0; trial < 60; ++trial) {
        std::vector<dataset::GtInstance> gts;
        int n_gt = static_cast<int>(rand_int(rng, 1, 5));
        for (int i = 0; i < n_gt; ++i) {
            gts.push_back(make_gt_rect(i + 1, 1, rand_int(rng, 0, 30), rand_int(rng, 0, 30),
                                       rand_int(rng, 2, 10), rand_int(rng, 2, 10)));
        }
        std::vector<dataset::Detection> detections;
        int n_det = static_cast<int>(rand_int(rng, 0, 5));
        for (int i = 0; i < n_det; ++i) {
            detections.push_back(make_detection(1, rand_int(rng, 0, 30), rand_int(rng, 0, 30),
                                                rand_int(rng, 2, 10), rand_int(rng, 2, 10),
                                                rand_int(rng, 1, 10) / 10.0));
        }

        metrics::ThresholdGrid grid = metrics::ThresholdGrid::coco();
        metrics::MapResult fast =
            metrics::coco_map({{1, detections}}, {{1, gts}}, grid);
        double sum = 0.0;
        for (std::size_t t = 0; t < grid.thresholds.size(); ++t) {
            double expected = ap_reference(detections, gts, grid.thresholds[t]);
            REQUIRE(fast.ap_per_threshold[t].second == expected);
            sum += expected;
        }
        REQUIRE(fast.map == sum / static_cast<double>(grid.thresholds.size()));
    }
}

TEST_CASE("fraction_at is inclusive at the threshold") {
    std::vector<double> ious = {0.5, 0.49, 0.75, 0.0};
    CHECK(metrics::fraction_at(ious, 0.5) == 2.0 / 4.0);
    CHECK(metrics::fraction_at(ious, 0.75) == 1.0 / 4.0);
    CHECK(metrics::fraction_at(ious, 0.0) == 1.0);
    CHECK_THROWS_AS(metrics::fraction_at({}, 0.5), UndefinedMetricError);
}

TEST_CASE("threshold curve walks the whole grid") {
    std::vector<double> ious = {0.2, 0.6, 0.8, 1.0};
    auto curve = metrics::threshold_curve(ious, metrics::ThresholdGrid::uniform(20));
    REQUIRE(curve.size() == 21);
    CHECK(curve.front() == std::pair{0.0, 1.0});
    CHECK(curve[10] == std::pair{0.5, 3.0 / 4.0});
    CHECK(curve.back() == std::pair{1.0, 1.0 / 4.0});
}

TEST_CASE("relaxed sweep validates radii and averages per radius") {
    BinaryMask a(5, 1), b(5, 1);
    a.set(0, 0, 1);
    b.set(0, 2, 1);
    std::vector<std::pair<BinaryMask, BinaryMask>> pairs = {{a, b}, {a, a}};

    auto sweep = metrics::relaxed_sweep(pairs, {0, 1});
    REQUIRE(sweep.size() == 2);
    CHECK(sweep[0] == std::pair{0, (0.0 + 1.0) / 2.0});
    CHECK(sweep[1] == std::pair{1, (0.25 + 1.0) / 2.0});

    CHECK_THROWS_AS(metrics::relaxed_sweep(pairs, {1, 2}), ConfigError);
    CHECK_THROWS_AS(metrics::relaxed_sweep(pairs, {0, 2, 1}), ConfigError);
    CHECK_THROWS_AS(metrics::relaxed_sweep({}, {0, 1}), UndefinedMetricError);
}

namespace {

// Two-image dataset used by the evaluate() cases: image 1 holds instances 1
// and 2, image 2 holds instance 3.
dataset::GroundTruth make_eval_gt() {
    dataset::GroundTruth gt;
    gt.images = {{1, 32, 16, "000001.pgm"}, {2, 32, 16, "000002.pgm"}};
    gt.instances = {
        {make_gt_rect(1, 1, 2, 2, 8, 4), make_gt_rect(2, 1, 20, 8, 8, 4)},
        {make_gt_rect(3, 2, 4, 4, 8, 4)},
    };
    gt.instances[0][0].scene = dataset::SceneTag::Inshore;
    gt.instances[0][1].scene = dataset::SceneTag::Inshore;
    gt.instances[1][0].scene = dataset::SceneTag::Offshore;
    return gt;
}

dataset::PredictedInstance make_pred_rect(std::int64_t image_id, double x, double y, double w,
                                          double h, double score, int img_w, int img_h) {
    dataset::PredictedInstance pred;
    pred.detection = {image_id, {x, y, w, h}, score};
    pred.mask = raster::rle_encode(raster::mask_from_bbox({x, y, w, h}, img_w, img_h));
    pred.quality = 1.0;
    return pred;
}

} // namespace

TEST_CASE("evaluate scores matched pairs and zero-fills unmatched ground truth") {
    dataset::GroundTruth gt = make_eval_gt();
    dataset::PredictionSet preds;
    // Instance 1 predicted with a 2-pixel shift; instance 2 missed entirely;
    // instance 3 predicted exactly.
    preds.by_image[1] = {make_pred_rect(1, 4, 2, 8, 4, 0.9, 32, 16)};
    preds.by_image[2] = {make_pred_rect(2, 4, 4, 8, 4, 0.8, 32, 16)};

    metrics::EvalResult result = metrics::evaluate(gt, preds, metrics::EvalConfig{});
    REQUIRE(result.instances.size() == 3);
    CHECK(result.detection_count == 2);

    const metrics::InstanceResult& first = result.instances[0];
    CHECK(first.instance_id == 1);
    CHECK(first.matched);
    CHECK(first.box_iou == 0.6);
    CHECK(first.mask_iou == 0.6);   // 24 / 40 shared pixels
    CHECK(first.dice == 0.75);      // 48 / 64
    CHECK(first.pixel_precision == 0.75);
    CHECK(first.pixel_recall == 0.75);
    REQUIRE(first.relaxed.size() == 4);
    CHECK(first.relaxed[0] == std::pair{0, 0.6});
    // radius 1 dilates both rects to 10x6 with overlap 8x6.
    CHECK(first.relaxed[1] == std::pair{1, 48.0 / 72.0});

    const metrics::InstanceResult& second = result.instances[1];
    CHECK_FALSE(second.matched);
    CHECK(second.mask_iou == 0.0);
    CHECK(second.dice == 0.0);

    const metrics::InstanceResult& third = result.instances[2];
    CHECK(third.matched);
    CHECK(third.mask_iou == 1.0);
    CHECK(third.scene == dataset::SceneTag::Offshore);
}

TEST_CASE("evaluate rejects predictions for unknown images") {
    dataset::GroundTruth gt = make_eval_gt();
    dataset::PredictionSet preds;
    preds.by_image[9] = {make_pred_rect(9, 0, 0, 4, 4, 0.9, 32, 16)};
    CHECK_THROWS_AS(metrics::evaluate(gt, preds, metrics::EvalConfig{}),
                    ReferentialIntegrityError);
}

TEST_CASE("evaluate treats a failed segmentation as matched but scoreless") {
    dataset::GroundTruth gt = make_eval_gt();
    dataset::PredictionSet preds;
    dataset::PredictedInstance failed = make_pred_rect(1, 2, 2, 8, 4, 0.9, 32, 16);
    failed.segmentation_failed = true;
    failed.mask = raster::rle_encode(BinaryMask(32, 16));
    failed.quality = 0.0;
    preds.by_image[1] = {failed};

    metrics::EvalResult result = metrics::evaluate(gt, preds, metrics::EvalConfig{});
    const metrics::InstanceResult& first = result.instances[0];
    CHECK(first.matched);
    CHECK(first.segmentation_failed);
    CHECK(first.box_iou == 1.0);
    CHECK(first.mask_iou == 0.0);
    CHECK(first.pixel_precision == 0.0); // empty mask: recorded as zero, not raised
}

TEST_CASE("evaluate is invariant to prediction order within an image") {
    dataset::GroundTruth gt = make_eval_gt();
    dataset::PredictionSet forward, backward;
    auto p1 = make_pred_rect(1, 2, 2, 8, 4, 0.9, 32, 16);
    auto p2 = make_pred_rect(1, 20, 8, 8, 4, 0.7, 32, 16);
    forward.by_image[1] = {p1, p2};
    backward.by_image[1] = {p2, p1};

    metrics::EvalResult a = metrics::evaluate(gt, forward, metrics::EvalConfig{});
    metrics::EvalResult b = metrics::evaluate(gt, backward, metrics::EvalConfig{});
    REQUIRE(a.instances.size() == b.instances.size());
    for (std::size_t i = 0; i < a.instances.size(); ++i) {
        CHECK(a.instances[i].instance_id == b.instances[i].instance_id);
        CHECK(a.instances[i].mask_iou == b.instances[i].mask_iou);
        CHECK(a.instances[i].matched == b.instances[i].matched);
    }
    CHECK(a.map.map == b.map.map);
}

TEST_CASE("evaluate validates its configuration") {
    dataset::GroundTruth gt = make_eval_gt();
    dataset::PredictionSet preds;

    metrics::EvalConfig bad_radii;
    bad_radii.relaxed_radii = {1, 2};
    CHECK_THROWS_AS(metrics::evaluate(gt, preds, bad_radii), ConfigError);

    metrics::EvalConfig bad_threshold;
    bad_threshold.match_threshold = 2.0;
    CHECK_THROWS_AS(metrics::evaluate(gt, preds, bad_threshold), ConfigError);
}
