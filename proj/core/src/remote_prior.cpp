#include "ptm/error.hpp"
#include "ptm/resonance.hpp"

#include <httplib.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>

namespace ptm {

RemotePrior::RemotePrior(RemotePriorConfig config) : config_(std::move(config))
{
    constexpr std::string_view scheme = "http://";
    const std::string& url = config_.endpoint;
    if (url.rfind(scheme, 0) != 0) {
        throw Error(ErrorCode::invalid_argument, "remote prior: endpoint must start with http:// ('" + url + "')");
    }
    const auto slash = url.find('/', scheme.size());
    base_ = url.substr(0, slash);
    path_ = slash == std::string::npos ? "/" : url.substr(slash);
    if (base_.size() == scheme.size()) throw Error(ErrorCode::invalid_argument, "remote prior: endpoint has no host");
    if (config_.timeout.count() <= 0) throw Error(ErrorCode::invalid_argument, "remote prior: timeout must be > 0");
    if (config_.retries < 0) throw Error(ErrorCode::invalid_argument, "remote prior: retries must be >= 0");
}

std::vector<double> RemotePrior::parse_response(std::string_view body, std::size_t expected)
{
    const auto doc = nlohmann::json::parse(body, nullptr, /*allow_exceptions=*/false);
    if (doc.is_discarded() || !doc.is_object() || !doc.contains("logprobs") || !doc["logprobs"].is_array()) {
        throw Error(ErrorCode::malformed_response, "remote prior: response lacks a logprobs array");
    }
    const auto& lp = doc["logprobs"];
    if (lp.size() != expected) {
        throw Error(ErrorCode::malformed_response, "remote prior: " + std::to_string(lp.size()) +
                                                       " logprobs for " + std::to_string(expected) + " candidates");
    }
    std::vector<double> p(expected);
    for (std::size_t i = 0; i < expected; ++i) {
        if (!lp[i].is_number()) throw Error(ErrorCode::malformed_response, "remote prior: non-numeric logprob");
        p[i] = lp[i].get<double>();
        if (std::isnan(p[i]) || p[i] == std::numeric_limits<double>::infinity()) {
            throw Error(ErrorCode::malformed_response, "remote prior: logprob is NaN or +inf");
        }
    }
    if (p.empty()) return p;
    const double top = *std::max_element(p.begin(), p.end());
    if (!std::isfinite(top)) throw Error(ErrorCode::malformed_response, "remote prior: all logprobs are -inf");
    double sum = 0.0;
    for (double& x : p) {
        x = std::exp(x - top);
        sum += x;
    }
    for (double& x : p) x /= sum;
    return p;
}

std::vector<double> RemotePrior::score(std::span<const std::string> context,
                                       std::span<const std::string_view> candidates) const
{
    const std::size_t keep = std::min(context.size(), config_.context_window);
    nlohmann::json request;
    request["context"] = nlohmann::json::array();
    for (const auto& tok : context.subspan(context.size() - keep)) request["context"].push_back(tok);
    request["candidates"] = nlohmann::json::array();
    for (const auto& c : candidates) request["candidates"].push_back(std::string(c));
    const std::string body = request.dump();

    // A client per call keeps concurrent callers independent.
    httplib::Client client(base_);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());

    std::string failure = "no attempt made";
    for (int attempt = 0; attempt <= config_.retries; ++attempt) {
        const auto res = client.Post(path_, body, "application/json");
        if (!res) {
            failure = httplib::to_string(res.error());
            continue;
        }
        if (res->status != 200) {
            failure = "HTTP " + std::to_string(res->status);
            continue;
        }
        return parse_response(res->body, candidates.size());
    }
    throw Error(ErrorCode::prior_unavailable, "remote prior " + config_.endpoint + ": " + failure);
}

} // namespace ptm
