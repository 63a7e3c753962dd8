#pragma once

#include <condition_variable>
#include <cstdio>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "maskbench/pipeline/backend.hpp"

#include <json.hpp>

namespace maskbench::pipeline {

// One child process speaking the newline-delimited JSON protocol over its
// standard input/output. Strictly one request in flight per channel; the
// child must answer every request with exactly one line and exit when its
// stdin closes.
class ExternalChannel {
  public:
    explicit ExternalChannel(const std::string& command);
    ~ExternalChannel();
    ExternalChannel(const ExternalChannel&) = delete;
    ExternalChannel& operator=(const ExternalChannel&) = delete;

    // Sends one request line, reads one response line. Returns the parsed
    // response plus the 1-based response line number for error reporting.
    std::pair<nlohmann::json, long> request(const nlohmann::json& req);

  private:
    std::string command_;
    int pid_ = -1;
    int to_child_ = -1;
    FILE* from_child_ = nullptr;
    long line_no_ = 0;
};

// Fixed-size pool of channels shared by the detector and segmenter halves.
// Acquisition blocks until a channel is free, so --jobs N with N channels
// keeps every worker busy without interleaving requests on one pipe.
class ExternalBackend {
  public:
    ExternalBackend(std::string command, int channels);

    std::pair<nlohmann::json, long> request(const nlohmann::json& req);

    const std::string& command() const { return command_; }

  private:
    std::string command_;
    std::vector<std::unique_ptr<ExternalChannel>> channels_;
    std::vector<ExternalChannel*> free_;
    std::mutex mu_;
    std::condition_variable cv_;
};

class ExternalDetector final : public Detector {
  public:
    explicit ExternalDetector(std::shared_ptr<ExternalBackend> backend) : backend_(std::move(backend)) {}
    std::vector<dataset::Detection> detect(const ImageRef& image) override;
    bool concurrency_safe() const override { return true; }

  private:
    std::shared_ptr<ExternalBackend> backend_;
};

class ExternalSegmenter final : public Segmenter {
  public:
    explicit ExternalSegmenter(std::shared_ptr<ExternalBackend> backend) : backend_(std::move(backend)) {}
    std::vector<MaskCandidate> segment(const ImageRef& image, const raster::BBox& box) override;
    bool concurrency_safe() const override { return true; }

  private:
    std::shared_ptr<ExternalBackend> backend_;
};

} // namespace maskbench::pipeline
