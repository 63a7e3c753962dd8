#include <doctest.h>

#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "maskbench/dataset/coco_io.hpp"
#include "maskbench/dataset/json_util.hpp"
#include "maskbench/dataset/synthetic.hpp"
#include "maskbench/metrics/metrics.hpp"
#include "maskbench/pipeline/clock.hpp"
#include "maskbench/pipeline/external.hpp"
#include "maskbench/pipeline/runner.hpp"
#include "maskbench/pipeline/store.hpp"
#include "maskbench/raster/ops.hpp"

using namespace maskbench;

namespace {

struct TempDir {
    std::filesystem::path path;

    TempDir() {
        static int counter = 0;
        path = std::filesystem::temp_directory_path() /
               ("maskbench_pipe_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

dataset::Detection make_det(std::int64_t image_id, double x, double y, double w, double h,
                            double score) {
    dataset::Detection det;
    det.image_id = image_id;
    det.bbox = raster::BBox{x, y, w, h};
    det.score = score;
    return det;
}

// Scripted detector: fixed detections per image id, optional failure.
class ScriptedDetector : public pipeline::Detector {
  public:
    std::map<std::int64_t, std::vector<dataset::Detection>> script;
    std::int64_t fail_image = -1;

    std::vector<dataset::Detection> detect(const pipeline::ImageRef& image) override {
        if (image.image_id == fail_image) throw BackendError("detector offline");
        auto it = script.find(image.image_id);
        return it == script.end() ? std::vector<dataset::Detection>{} : it->second;
    }
    bool concurrency_safe() const override { return true; }
};

// Scripted segmenter: records every prompt box it receives and replies with a
// fixed candidate list (or refuses, for designated boxes).
class ScriptedSegmenter : public pipeline::Segmenter {
  public:
    std::vector<raster::BBox> seen;
    std::vector<pipeline::MaskCandidate> candidates;
    double refuse_x = -1.0; // prompts starting at this x raise EmptyCandidateError

    std::vector<pipeline::MaskCandidate> segment(const pipeline::ImageRef& image,
                                                 const raster::BBox& box) override {
        (void)image;
        seen.push_back(box);
        if (box.x == refuse_x) throw EmptyCandidateError("scripted refusal");
        return candidates;
    }
    bool concurrency_safe() const override { return true; }
};

pipeline::MaskCandidate fill_candidate(const raster::BBox& box, int width, int height,
                                       double quality) {
    pipeline::MaskCandidate cand;
    cand.mask = raster::rle_encode(raster::mask_from_bbox(box, width, height));
    cand.quality = quality;
    return cand;
}

// Single-image ground truth frame for scripted-backend tests.
dataset::GroundTruth one_image_gt(int width = 16, int height = 16) {
    dataset::GroundTruth gt;
    gt.images.push_back({1, width, height, "000001.pgm"});
    gt.instances.resize(1);
    return gt;
}

// Pass-through wrappers that pretend each backend stage takes a fixed time.
class LatencyDetector : public pipeline::Detector {
  public:
    LatencyDetector(std::shared_ptr<pipeline::Detector> inner, pipeline::ManualClock& clock,
                    double ms)
        : inner_(std::move(inner)), clock_(clock), ms_(ms) {}
    std::vector<dataset::Detection> detect(const pipeline::ImageRef& image) override {
        clock_.advance(ms_);
        return inner_->detect(image);
    }
    bool concurrency_safe() const override { return true; }

  private:
    std::shared_ptr<pipeline::Detector> inner_;
    pipeline::ManualClock& clock_;
    double ms_;
};

class LatencySegmenter : public pipeline::Segmenter {
  public:
    LatencySegmenter(std::shared_ptr<pipeline::Segmenter> inner, pipeline::ManualClock& clock,
                     double ms)
        : inner_(std::move(inner)), clock_(clock), ms_(ms) {}
    std::vector<pipeline::MaskCandidate> segment(const pipeline::ImageRef& image,
                                                 const raster::BBox& box) override {
        clock_.advance(ms_);
        return inner_->segment(image, box);
    }
    bool concurrency_safe() const override { return true; }

  private:
    std::shared_ptr<pipeline::Segmenter> inner_;
    pipeline::ManualClock& clock_;
    double ms_;
};

} // namespace

TEST_CASE("confidence filter is inclusive and keeps input order") {
    std::vector<dataset::Detection> dets = {
        make_det(1, 0, 0, 2, 2, 0.49),
        make_det(1, 1, 1, 2, 2, 0.5),
        make_det(1, 2, 2, 2, 2, 0.51),
        make_det(1, 3, 3, 2, 2, 1.0),
    };
    std::vector<dataset::Detection> kept = pipeline::filter_detections(dets, 0.5);
    REQUIRE(kept.size() == 3);
    CHECK(kept[0].bbox.x == 1);
    CHECK(kept[1].bbox.x == 2);
    CHECK(kept[2].bbox.x == 3);
    CHECK(pipeline::filter_detections(dets, 0.0).size() == 4);
    CHECK(pipeline::filter_detections(dets, 1.0).size() == 1);
}

TEST_CASE("mask selection takes the best quality, first on ties") {
    std::vector<pipeline::MaskCandidate> cands(3);
    cands[0].quality = 0.7;
    cands[1].quality = 0.9;
    cands[2].quality = 0.9;
    CHECK(&pipeline::select_mask(cands) == &cands[1]);
    cands[0].quality = 0.95;
    CHECK(&pipeline::select_mask(cands) == &cands[0]);
    CHECK_THROWS_AS(pipeline::select_mask({}), EmptyCandidateError);
}

TEST_CASE("pipeline configuration is validated before running") {
    pipeline::PipelineConfig cfg;
    cfg.confidence_threshold = 1.5;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.match_threshold = -0.1;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.max_candidates = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.jobs = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.box_expand = -0.5;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    CHECK_NOTHROW(cfg.validate());

    dataset::GroundTruth empty;
    ScriptedDetector det;
    ScriptedSegmenter seg;
    pipeline::ManualClock clock;
    CHECK_THROWS_AS(pipeline::run_pipeline(empty, det, seg, {}, clock), ConfigError);
}

TEST_CASE("zero perturbation replays the ground truth exactly") {
    dataset::SyntheticDatasetSpec spec;
    spec.image_count = 6;
    spec.seed = 7;
    dataset::GroundTruth gt = dataset::generate_synthetic_dataset(spec);

    auto store = std::make_shared<pipeline::PredictionStore>(
        pipeline::PredictionStore::from_perturbation(gt, {}));
    pipeline::StoreDetector detector(store);
    pipeline::StoreSegmenter segmenter(store);
    pipeline::ManualClock clock;

    pipeline::PipelineResult result = pipeline::run_pipeline(gt, detector, segmenter, {}, clock);
    CHECK(result.skipped_images.empty());
    REQUIRE(result.timings.size() == gt.images.size());

    for (std::size_t idx = 0; idx < gt.images.size(); ++idx) {
        const auto& preds = result.predictions.by_image.at(gt.images[idx].id);
        REQUIRE(preds.size() == gt.instances[idx].size());
        for (std::size_t k = 0; k < preds.size(); ++k) {
            const auto& inst = gt.instances[idx][k];
            raster::BinaryMask gt_mask = raster::rasterize_polygons(
                inst.polygons, gt.images[idx].width, gt.images[idx].height);
            CHECK(raster::rle_decode(preds[k].mask) == gt_mask);
            CHECK(preds[k].detection.bbox.x == inst.bbox.x);
            CHECK(preds[k].quality == 1.0);
            CHECK_FALSE(preds[k].segmentation_failed);
        }
    }
}

TEST_CASE("prompts are expanded, clipped, or dropped before segmentation") {
    dataset::GroundTruth gt = one_image_gt();
    ScriptedDetector detector;
    detector.script[1] = {
        make_det(1, 4, 4, 4, 4, 0.9),     // interior: expanded
        make_det(1, -2, 6, 6, 6, 0.8),    // spills left: clipped
        make_det(1, 40, 40, 4, 4, 0.7),   // fully out of frame: dropped
        make_det(1, 0, 0, 2, 2, 0.3),     // below confidence: filtered
    };
    ScriptedSegmenter segmenter;
    segmenter.candidates = {fill_candidate({4, 4, 4, 4}, 16, 16, 0.9)};

    pipeline::PipelineConfig cfg;
    cfg.box_expand = 0.25;
    pipeline::ManualClock clock;
    pipeline::PipelineResult result = pipeline::run_pipeline(gt, detector, segmenter, cfg, clock);

    REQUIRE(segmenter.seen.size() == 2);
    // 4x4 box grown by a quarter per side.
    CHECK(segmenter.seen[0].x == 3.0);
    CHECK(segmenter.seen[0].y == 3.0);
    CHECK(segmenter.seen[0].w == 6.0);
    CHECK(segmenter.seen[0].h == 6.0);
    // Expanded to {-3.5, 4.5, 9, 9}, then clipped to the frame.
    CHECK(segmenter.seen[1].x == 0.0);
    CHECK(segmenter.seen[1].y == 4.5);
    CHECK(segmenter.seen[1].w == 5.5);
    CHECK(segmenter.seen[1].h == 9.0);

    const auto& preds = result.predictions.by_image.at(1);
    REQUIRE(preds.size() == 2);
    // The recorded detection carries the prompted (clipped) box.
    CHECK(preds[1].detection.bbox.x == 0.0);
    CHECK(preds[1].detection.bbox.w == 5.5);
    // Timing: the out-of-frame prompt no longer counts as a ship.
    REQUIRE(result.timings.size() == 1);
    CHECK(result.timings[0].ship_count == 2);
    CHECK(result.timings[0].segment_ms.size() == 2);
}

TEST_CASE("prompt boxes pass through bit-exact when inside the frame") {
    dataset::GroundTruth gt = one_image_gt();
    ScriptedDetector detector;
    raster::BBox fractional{1.25, 2.75, 3.5, 4.125};
    detector.script[1] = {make_det(1, fractional.x, fractional.y, fractional.w, fractional.h, 0.9)};
    ScriptedSegmenter segmenter;
    segmenter.candidates = {fill_candidate(fractional, 16, 16, 1.0)};

    pipeline::ManualClock clock;
    pipeline::run_pipeline(gt, detector, segmenter, {}, clock);
    REQUIRE(segmenter.seen.size() == 1);
    CHECK(segmenter.seen[0].x == fractional.x);
    CHECK(segmenter.seen[0].y == fractional.y);
    CHECK(segmenter.seen[0].w == fractional.w);
    CHECK(segmenter.seen[0].h == fractional.h);
}

TEST_CASE("candidate lists are truncated before selection") {
    dataset::GroundTruth gt = one_image_gt();
    ScriptedDetector detector;
    detector.script[1] = {make_det(1, 2, 2, 4, 4, 0.9)};
    ScriptedSegmenter segmenter;
    segmenter.candidates = {
        fill_candidate({2, 2, 4, 4}, 16, 16, 0.6),
        fill_candidate({2, 2, 3, 3}, 16, 16, 0.7),
        fill_candidate({2, 2, 2, 2}, 16, 16, 0.5),
        fill_candidate({2, 2, 1, 1}, 16, 16, 0.99), // beyond the candidate cap
    };

    pipeline::ManualClock clock;
    pipeline::PipelineResult result = pipeline::run_pipeline(gt, detector, segmenter, {}, clock);
    const auto& pred = result.predictions.by_image.at(1)[0];
    CHECK(pred.quality == 0.7); // the capped list never saw the 0.99 candidate
    CHECK(raster::rle_decode(pred.mask).area() == 9);
}

TEST_CASE("a refused prompt becomes a flagged empty-mask prediction") {
    dataset::GroundTruth gt = one_image_gt();
    ScriptedDetector detector;
    detector.script[1] = {make_det(1, 2, 2, 4, 4, 0.9), make_det(1, 8, 8, 4, 4, 0.8)};
    ScriptedSegmenter segmenter;
    segmenter.candidates = {fill_candidate({2, 2, 4, 4}, 16, 16, 0.9)};
    segmenter.refuse_x = 8.0;

    pipeline::ManualClock clock;
    pipeline::PipelineResult result = pipeline::run_pipeline(gt, detector, segmenter, {}, clock);
    const auto& preds = result.predictions.by_image.at(1);
    REQUIRE(preds.size() == 2);
    CHECK_FALSE(preds[0].segmentation_failed);
    CHECK(preds[1].segmentation_failed);
    CHECK(preds[1].quality == 0.0);
    CHECK(raster::rle_decode(preds[1].mask).area() == 0);
    // The failed prompt still contributes a segment-time sample.
    CHECK(result.timings[0].segment_ms.size() == 2);
}

TEST_CASE("backend failures abort by default and skip on request") {
    dataset::GroundTruth gt;
    gt.images.push_back({1, 16, 16, ""});
    gt.images.push_back({2, 16, 16, ""});
    gt.images.push_back({3, 16, 16, ""});
    gt.instances.resize(3);

    ScriptedDetector detector;
    detector.script[1] = {make_det(1, 2, 2, 4, 4, 0.9)};
    detector.script[2] = {make_det(2, 2, 2, 4, 4, 0.9)};
    detector.script[3] = {make_det(3, 2, 2, 4, 4, 0.9)};
    detector.fail_image = 2;
    ScriptedSegmenter segmenter;
    segmenter.candidates = {fill_candidate({2, 2, 4, 4}, 16, 16, 0.9)};

    pipeline::ManualClock clock;
    CHECK_THROWS_WITH_AS(pipeline::run_pipeline(gt, detector, segmenter, {}, clock),
                         doctest::Contains("image 2"), BackendError);

    pipeline::PipelineConfig cfg;
    cfg.skip_failed_images = true;
    pipeline::PipelineResult result = pipeline::run_pipeline(gt, detector, segmenter, cfg, clock);
    REQUIRE(result.skipped_images.size() == 1);
    CHECK(result.skipped_images[0] == 2);
    REQUIRE(result.errors.size() == 1);
    CHECK(result.errors[0].find("detector offline") != std::string::npos);
    CHECK(result.timings.size() == 2); // failed image contributes no timing
    CHECK(result.predictions.by_image.count(2) == 0);
    CHECK(result.predictions.by_image.count(1) == 1);
    CHECK(result.predictions.by_image.count(3) == 1);
}

TEST_CASE("replay stores expose multi-candidate records through exact box lookup") {
    dataset::GroundTruth gt = one_image_gt();
    gt.instances[0].push_back({1, 1, raster::BBox{2, 2, 4, 4},
                               {raster::Polygon{{{2, 2}, {6, 2}, {6, 6}, {2, 6}}}},
                               dataset::SceneTag::Unknown});

    TempDir dir;
    dataset::ordered_json records = dataset::ordered_json::array();
    dataset::ordered_json rec;
    rec["image_id"] = 1;
    rec["bbox"] = dataset::bbox_to_json(raster::BBox{2, 2, 4, 4});
    rec["score"] = 0.9;
    rec["candidates"] = dataset::ordered_json::array();
    for (double q : {0.5, 0.8, 0.6}) {
        dataset::ordered_json cand;
        cand["segmentation"] = dataset::rle_to_json(
            raster::rle_encode(raster::mask_from_bbox({2, 2, 4, 4 * q}, 16, 16)));
        cand["quality"] = q;
        rec["candidates"].push_back(std::move(cand));
    }
    records.push_back(std::move(rec));
    std::string path = (dir.path / "preds.json").string();
    dataset::write_text_file(path, records.dump(2));

    pipeline::PredictionStore store = pipeline::PredictionStore::from_file(path, gt);
    const auto* stored = store.find_by_box(1, {2, 2, 4, 4});
    REQUIRE(stored != nullptr);
    REQUIRE(stored->candidates.size() == 3);
    CHECK(store.find_by_box(1, {2, 2, 4, 5}) == nullptr);
    CHECK(store.for_image(99).empty());

    // Through the pipeline, the 0.8-quality candidate wins.
    auto shared = std::make_shared<pipeline::PredictionStore>(std::move(store));
    pipeline::StoreDetector detector(shared);
    pipeline::StoreSegmenter segmenter(shared);
    pipeline::ManualClock clock;
    pipeline::PipelineResult result = pipeline::run_pipeline(gt, detector, segmenter, {}, clock);
    const auto& pred = result.predictions.by_image.at(1)[0];
    CHECK(pred.quality == 0.8);
    CHECK(raster::rle_decode(pred.mask).area() ==
          raster::mask_from_bbox({2, 2, 4, 3.2}, 16, 16).area());
}

TEST_CASE("stage latencies aggregate into exact modeled totals") {
    dataset::SyntheticDatasetSpec spec;
    spec.image_count = 20;
    spec.ships_min = 1;
    spec.ships_max = 4;
    spec.seed = 7;
    dataset::GroundTruth gt = dataset::generate_synthetic_dataset(spec);

    auto store = std::make_shared<pipeline::PredictionStore>(
        pipeline::PredictionStore::from_perturbation(gt, {}));
    pipeline::ManualClock clock;
    LatencyDetector detector(std::make_shared<pipeline::StoreDetector>(store), clock, 8.0);
    LatencySegmenter segmenter(std::make_shared<pipeline::StoreSegmenter>(store), clock, 85.0);

    pipeline::PipelineResult result = pipeline::run_pipeline(gt, detector, segmenter, {}, clock);
    REQUIRE(result.timings.size() == 20);
    for (const auto& rec : result.timings) {
        CHECK(rec.detect_ms == 8.0);
        for (double ms : rec.segment_ms) CHECK(ms == 85.0);
        CHECK(rec.segment_ms.size() == static_cast<std::size_t>(rec.ship_count));
    }

    pipeline::TimingSummary summary = pipeline::summarize_timing(result.timings);
    CHECK(summary.image_count == 20);
    CHECK(summary.prompt_count == gt.total_instances());
    CHECK(summary.detect_mean == 8.0);
    CHECK(summary.detect_std == 0.0);
    CHECK(summary.segment_mean == 85.0);
    CHECK(summary.segment_std == 0.0);
    CHECK(pipeline::modeled_total(summary, 2.0) == 178.0);
    CHECK(pipeline::modeled_total(summary, 4.0) == 348.0);

    CHECK_THROWS_AS(pipeline::summarize_timing({}), UndefinedMetricError);
}

TEST_CASE("timing summaries pool variance across images") {
    std::vector<pipeline::TimingRecord> records(2);
    records[0].detect_ms = 6.0;
    records[0].segment_ms = {80.0};
    records[0].ship_count = 1;
    records[1].detect_ms = 10.0;
    records[1].segment_ms = {90.0, 100.0};
    records[1].ship_count = 2;

    pipeline::TimingSummary s = pipeline::summarize_timing(records);
    CHECK(s.detect_mean == 8.0);
    CHECK(s.detect_std == 2.0);
    CHECK(s.segment_mean == 90.0);
    // Population deviation over {80, 90, 100}.
    CHECK(s.segment_std == doctest::Approx(std::sqrt(200.0 / 3.0)).epsilon(1e-12));
}

TEST_CASE("worker count never changes the predictions") {
    dataset::SyntheticDatasetSpec spec;
    spec.image_count = 12;
    spec.ships_min = 1;
    spec.ships_max = 4;
    spec.seed = 7;
    dataset::GroundTruth gt = dataset::generate_synthetic_dataset(spec);

    dataset::PerturbationSpec perturb;
    perturb.shift = 1;
    perturb.seed = 7;
    auto store = std::make_shared<pipeline::PredictionStore>(
        pipeline::PredictionStore::from_perturbation(gt, perturb));
    pipeline::StoreDetector detector(store);
    pipeline::StoreSegmenter segmenter(store);

    pipeline::SteadyClock clock;
    pipeline::PipelineConfig serial;
    serial.jobs = 1;
    pipeline::PipelineConfig parallel;
    parallel.jobs = 8;
    pipeline::PipelineResult a = pipeline::run_pipeline(gt, detector, segmenter, serial, clock);
    pipeline::PipelineResult b = pipeline::run_pipeline(gt, detector, segmenter, parallel, clock);

    TempDir dir;
    std::string pa = (dir.path / "a.json").string();
    std::string pb = (dir.path / "b.json").string();
    dataset::write_predictions(a.predictions, pa);
    dataset::write_predictions(b.predictions, pb);
    CHECK(read_file(pa) == read_file(pb));
}

TEST_CASE("external processes answer detect and segment over pipes") {
    dataset::SyntheticDatasetSpec spec;
    spec.image_count = 4;
    spec.ships_min = 1;
    spec.ships_max = 2;
    spec.seed = 13;
    dataset::GroundTruth gt = dataset::generate_synthetic_dataset(spec);

    TempDir dir;
    std::string gt_path = (dir.path / "gt.json").string();
    dataset::write_ground_truth(gt, gt_path);
    dataset::GroundTruth loaded = dataset::load_ground_truth(gt_path);

    pipeline::BackendDescriptor desc;
    desc.kind = pipeline::BackendDescriptor::Kind::ExternalProcess;
    desc.command = std::string(MASKBENCH_STUB_PATH) + " --gt " + gt_path;
    desc.channels = 2;
    pipeline::BackendPair backend = pipeline::make_backend(desc, loaded);

    pipeline::PipelineConfig cfg;
    cfg.jobs = 2;
    pipeline::SteadyClock clock;
    pipeline::PipelineResult result =
        pipeline::run_pipeline(loaded, *backend.detector, *backend.segmenter, cfg, clock);

    CHECK(result.skipped_images.empty());
    for (std::size_t idx = 0; idx < loaded.images.size(); ++idx) {
        const auto& preds = result.predictions.by_image.at(loaded.images[idx].id);
        REQUIRE(preds.size() == loaded.instances[idx].size());
        for (std::size_t k = 0; k < preds.size(); ++k) {
            CHECK(preds[k].quality == 0.9);
            // The stub fills the ground-truth box, which for rectangular ships
            // is the exact instance mask.
            raster::BinaryMask expected = raster::mask_from_bbox(
                loaded.instances[idx][k].bbox, loaded.images[idx].width, loaded.images[idx].height);
            CHECK(raster::rle_decode(preds[k].mask) == expected);
        }
    }
}

TEST_CASE("a garbled backend response surfaces as a backend error") {
    dataset::SyntheticDatasetSpec spec;
    spec.image_count = 1;
    spec.seed = 13;
    dataset::GroundTruth gt = dataset::generate_synthetic_dataset(spec);

    TempDir dir;
    std::string gt_path = (dir.path / "gt.json").string();
    dataset::write_ground_truth(gt, gt_path);
    dataset::GroundTruth loaded = dataset::load_ground_truth(gt_path);

    pipeline::BackendDescriptor desc;
    desc.kind = pipeline::BackendDescriptor::Kind::ExternalProcess;
    desc.command = std::string(MASKBENCH_STUB_PATH) + " --gt " + gt_path + " --malformed 1";
    pipeline::BackendPair backend = pipeline::make_backend(desc, loaded);

    pipeline::SteadyClock clock;
    CHECK_THROWS_WITH_AS(
        pipeline::run_pipeline(loaded, *backend.detector, *backend.segmenter, {}, clock),
        doctest::Contains("malformed backend response"), BackendError);
}

TEST_CASE("backend kinds map to and from their names") {
    using Kind = pipeline::BackendDescriptor::Kind;
    CHECK(pipeline::to_string(Kind::Replay) == "replay");
    CHECK(pipeline::to_string(Kind::SyntheticOracle) == "synthetic-oracle");
    CHECK(pipeline::to_string(Kind::ExternalProcess) == "external-process");
    CHECK(pipeline::backend_kind_from_string("replay") == Kind::Replay);
    CHECK(pipeline::backend_kind_from_string("synthetic-oracle") == Kind::SyntheticOracle);
    CHECK(pipeline::backend_kind_from_string("external-process") == Kind::ExternalProcess);
    CHECK_THROWS_AS(pipeline::backend_kind_from_string("quantum"), ConfigError);
}
