#include "maskbench/pipeline/external.hpp"

#include <fcntl.h>
#include <sys/wait.h>
#include <unistd.h>

#include <csignal>
#include <cstring>

#include "maskbench/core/log.hpp"
#include "maskbench/dataset/json_util.hpp"

namespace maskbench::pipeline {

namespace {

using nlohmann::json;

// The pipe may outlive the child; a write into a dead child must surface as
// a BackendError, not kill the whole process.
void ignore_sigpipe_once() {
    static const int done = [] {
        std::signal(SIGPIPE, SIG_IGN);
        return 0;
    }();
    (void)done;
}

void write_all(int fd, const std::string& data, const std::string& command) {
    std::size_t off = 0;
    while (off < data.size()) {
        ssize_t n = ::write(fd, data.data() + off, data.size() - off);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw BackendError("backend process is not accepting requests (" + command +
                               "): " + std::strerror(errno));
        }
        off += static_cast<std::size_t>(n);
    }
}

} // namespace

ExternalChannel::ExternalChannel(const std::string& command) : command_(command) {
    ignore_sigpipe_once();
    // O_CLOEXEC keeps one channel's pipe ends from leaking into siblings
    // forked later; a leaked write end would hold the child's stdin open
    // forever and turn shutdown into a deadlock.
    int to_child[2];
    int from_child[2];
    if (::pipe2(to_child, O_CLOEXEC) != 0 || ::pipe2(from_child, O_CLOEXEC) != 0) {
        throw BackendError("cannot create pipes for backend command: " + command);
    }
    pid_ = ::fork();
    if (pid_ < 0) {
        throw BackendError("cannot fork backend process: " + command);
    }
    if (pid_ == 0) {
        ::dup2(to_child[0], STDIN_FILENO);
        ::dup2(from_child[1], STDOUT_FILENO);
        ::close(to_child[0]);
        ::close(to_child[1]);
        ::close(from_child[0]);
        ::close(from_child[1]);
        ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
        ::_exit(127);
    }
    ::close(to_child[0]);
    ::close(from_child[1]);
    to_child_ = to_child[1];
    from_child_ = ::fdopen(from_child[0], "r");
    if (from_child_ == nullptr) {
        ::close(from_child[0]);
        ::close(to_child_);
        throw BackendError("cannot open backend output stream: " + command);
    }
    maskbench::log_debug("spawned backend channel: " + command);
}

ExternalChannel::~ExternalChannel() {
    if (to_child_ >= 0) ::close(to_child_); // EOF tells the child to exit
    if (from_child_ != nullptr) ::fclose(from_child_);
    if (pid_ > 0) {
        int status = 0;
        ::waitpid(pid_, &status, 0);
    }
}

std::pair<json, long> ExternalChannel::request(const json& req) {
    write_all(to_child_, req.dump() + "\n", command_);

    char* line = nullptr;
    std::size_t cap = 0;
    ssize_t len = ::getline(&line, &cap, from_child_);
    if (len < 0) {
        std::free(line);
        throw BackendError("backend process closed its output after " + std::to_string(line_no_) +
                           " response(s) (" + command_ + ")");
    }
    ++line_no_;
    std::string text(line, static_cast<std::size_t>(len));
    std::free(line);

    json parsed = json::parse(text, nullptr, false);
    if (parsed.is_discarded()) {
        throw ProtocolError("malformed backend response on line " + std::to_string(line_no_) + " (" +
                            command_ + ")");
    }
    return {std::move(parsed), line_no_};
}

ExternalBackend::ExternalBackend(std::string command, int channels) : command_(std::move(command)) {
    if (command_.empty()) throw ConfigError("external backend needs a command line");
    if (channels < 1) throw ConfigError("external backend needs at least 1 channel");
    for (int i = 0; i < channels; ++i) {
        channels_.push_back(std::make_unique<ExternalChannel>(command_));
        free_.push_back(channels_.back().get());
    }
}

std::pair<json, long> ExternalBackend::request(const json& req) {
    ExternalChannel* channel = nullptr;
    {
        std::unique_lock lock(mu_);
        cv_.wait(lock, [this] { return !free_.empty(); });
        channel = free_.back();
        free_.pop_back();
    }
    try {
        auto response = channel->request(req);
        {
            std::lock_guard lock(mu_);
            free_.push_back(channel);
        }
        cv_.notify_one();
        return response;
    } catch (...) {
        {
            std::lock_guard lock(mu_);
            free_.push_back(channel);
        }
        cv_.notify_one();
        throw;
    }
}

std::vector<dataset::Detection> ExternalDetector::detect(const ImageRef& image) {
    json req{{"type", "detect"}, {"image", image.path}};
    auto [resp, line_no] = backend_->request(req);
    if (!resp.is_object() || !resp.contains("detections") || !resp["detections"].is_array()) {
        throw ProtocolError("backend response on line " + std::to_string(line_no) +
                            " lacks a \"detections\" array");
    }
    std::vector<dataset::Detection> out;
    for (const json& jd : resp["detections"]) {
        if (!jd.is_object() || !jd.contains("bbox") || !jd.contains("score") ||
            !jd["score"].is_number()) {
            throw ProtocolError("malformed detection in backend response on line " +
                                std::to_string(line_no));
        }
        dataset::Detection det;
        det.image_id = image.image_id;
        try {
            det.bbox = dataset::json_to_bbox(jd["bbox"], "backend response line " + std::to_string(line_no));
        } catch (const ParseError& e) {
            throw ProtocolError(e.what());
        }
        det.score = jd["score"].get<double>();
        if (!(det.score >= 0.0 && det.score <= 1.0)) {
            throw ProtocolError("detection score outside [0, 1] in backend response on line " +
                                std::to_string(line_no));
        }
        out.push_back(det);
    }
    return out;
}

std::vector<MaskCandidate> ExternalSegmenter::segment(const ImageRef& image, const raster::BBox& box) {
    json req{{"type", "segment"},
             {"image", image.path},
             {"bbox", json::array({box.x, box.y, box.w, box.h})}};
    auto [resp, line_no] = backend_->request(req);
    if (!resp.is_object() || !resp.contains("candidates") || !resp["candidates"].is_array()) {
        throw ProtocolError("backend response on line " + std::to_string(line_no) +
                            " lacks a \"candidates\" array");
    }
    std::vector<MaskCandidate> out;
    for (const json& jc : resp["candidates"]) {
        if (!jc.is_object() || !jc.contains("segmentation") || !jc.contains("quality") ||
            !jc["quality"].is_number()) {
            throw ProtocolError("malformed candidate in backend response on line " +
                                std::to_string(line_no));
        }
        MaskCandidate cand;
        try {
            cand.mask = dataset::json_to_rle(jc["segmentation"],
                                             "backend response line " + std::to_string(line_no));
        } catch (const ParseError& e) {
            throw ProtocolError(e.what());
        }
        if (cand.mask.height != image.height || cand.mask.width != image.width) {
            throw ProtocolError("candidate mask size mismatches image " + std::to_string(image.image_id) +
                                " in backend response on line " + std::to_string(line_no));
        }
        cand.quality = jc["quality"].get<double>();
        if (!(cand.quality >= 0.0 && cand.quality <= 1.0)) {
            throw ProtocolError("candidate quality outside [0, 1] in backend response on line " +
                                std::to_string(line_no));
        }
        out.push_back(std::move(cand));
    }
    if (out.empty()) {
        throw EmptyCandidateError("backend returned zero candidates for image " +
                                  std::to_string(image.image_id));
    }
    return out;
}

} // namespace maskbench::pipeline
