#include "maskbench/pipeline/backend.hpp"

#include "maskbench/pipeline/external.hpp"
#include "maskbench/pipeline/store.hpp"

namespace maskbench::pipeline {

std::string to_string(BackendDescriptor::Kind kind) {
    switch (kind) {
        case BackendDescriptor::Kind::Replay: return "replay";
        case BackendDescriptor::Kind::SyntheticOracle: return "synthetic-oracle";
        case BackendDescriptor::Kind::ExternalProcess: break;
    }
    return "external-process";
}

BackendDescriptor::Kind backend_kind_from_string(const std::string& value) {
    if (value == "replay") return BackendDescriptor::Kind::Replay;
    if (value == "synthetic-oracle") return BackendDescriptor::Kind::SyntheticOracle;
    if (value == "external-process") return BackendDescriptor::Kind::ExternalProcess;
    throw ConfigError("unknown backend kind \"" + value +
                      "\" (expected replay, synthetic-oracle, or external-process)");
}

BackendPair make_backend(const BackendDescriptor& desc, const dataset::GroundTruth& gt) {
    switch (desc.kind) {
        case BackendDescriptor::Kind::Replay: {
            if (desc.predictions_path.empty()) {
                throw ConfigError("replay backend needs a predictions file path");
            }
            auto store = std::make_shared<const PredictionStore>(
                PredictionStore::from_file(desc.predictions_path, gt));
            return {std::make_shared<StoreDetector>(store), std::make_shared<StoreSegmenter>(store)};
        }
        case BackendDescriptor::Kind::SyntheticOracle: {
            auto store = std::make_shared<const PredictionStore>(
                PredictionStore::from_perturbation(gt, desc.perturb));
            return {std::make_shared<StoreDetector>(store), std::make_shared<StoreSegmenter>(store)};
        }
        case BackendDescriptor::Kind::ExternalProcess: {
            auto backend = std::make_shared<ExternalBackend>(desc.command, desc.channels);
            return {std::make_shared<ExternalDetector>(backend),
                    std::make_shared<ExternalSegmenter>(backend)};
        }
    }
    throw ConfigError("unhandled backend kind");
}

} // namespace maskbench::pipeline
