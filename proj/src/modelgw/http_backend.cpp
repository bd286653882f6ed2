#include "iclforge/modelgw/http_backend.hpp"

#include <cmath>
#include <cstdlib>
#include <mutex>
#include <sstream>

#include <httplib.h>
#include <json.hpp>

#include "iclforge/error.hpp"

namespace iclforge::modelgw {

using nlohmann::json;

namespace {

json Messages(const Transcript& t) {
  json arr = json::array();
  for (const auto& turn : t) {
    arr.push_back({{"role", std::string(RoleName(turn.role))}, {"content", turn.content}});
  }
  return arr;
}

std::string TrimBullet(std::string line) {
  std::size_t i = 0;
  while (i < line.size() && (std::isspace(static_cast<unsigned char>(line[i])) ||
                             std::isdigit(static_cast<unsigned char>(line[i])) || line[i] == '.' ||
                             line[i] == '-' || line[i] == '*' || line[i] == ')' || line[i] == '`')) {
    ++i;
  }
  line.erase(0, i);
  while (!line.empty() && (std::isspace(static_cast<unsigned char>(line.back())) || line.back() == '`')) {
    line.pop_back();
  }
  return line;
}

}  // namespace

struct HttpBackend::Impl {
  std::string url;
  httplib::Client client;
  std::mutex mu;
  std::string encoder_id;

  Impl(std::string u, int timeout) : url(std::move(u)), client(url) {
    client.set_connection_timeout(timeout, 0);
    client.set_read_timeout(timeout, 0);
    client.set_write_timeout(timeout, 0);
  }

  // Returns the status and parsed body; non-2xx statuses other than those in
  // `passthrough` raise.
  std::pair<int, json> Post(const std::string& path, const json& body,
                            std::initializer_list<int> passthrough = {}) {
    httplib::Result res;
    {
      std::lock_guard<std::mutex> lock(mu);
      res = client.Post(path, body.dump(), "application/json");
    }
    if (!res) {
      throw Error(ErrorCode::kBackendUnavailable,
                  url + path + ": " + httplib::to_string(res.error()));
    }
    for (int s : passthrough) {
      if (res->status == s) return {s, json()};
    }
    if (res->status >= 500 && res->status != 501) {
      throw Error(ErrorCode::kBackendUnavailable, url + path + ": HTTP " + std::to_string(res->status));
    }
    if (res->status < 200 || res->status >= 300) {
      throw Error(ErrorCode::kProtocolError, url + path + ": HTTP " + std::to_string(res->status));
    }
    try {
      json parsed = json::parse(res->body);
      if (!parsed.is_object()) throw Error(ErrorCode::kProtocolError, path + ": body is not an object");
      return {res->status, std::move(parsed)};
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kProtocolError, path + ": " + e.what());
    }
  }
};

HttpBackend::HttpBackend(std::string base_url, int timeout_seconds) {
  if (base_url.empty()) {
    const char* env = std::getenv(kBackendUrlEnv);
    if (env == nullptr || *env == '\0') {
      throw Error(ErrorCode::kConfigError, std::string(kBackendUrlEnv) + " is not set");
    }
    base_url = env;
  }
  while (!base_url.empty() && base_url.back() == '/') base_url.pop_back();
  impl_ = std::make_unique<Impl>(base_url, timeout_seconds);
}

HttpBackend::~HttpBackend() = default;

std::string HttpBackend::Id() const { return "remote:" + impl_->url; }

std::string HttpBackend::EncoderId() const {
  std::lock_guard<std::mutex> lock(impl_->mu);
  return impl_->encoder_id.empty() ? Id() : impl_->encoder_id;
}

std::string HttpBackend::Complete(const Transcript& t, const CompletionParams& p) {
  auto [status, body] = impl_->Post(
      "/complete", {{"messages", Messages(t)}, {"max_tokens", p.max_tokens}, {"temperature", p.temperature}});
  if (!body.contains("text") || !body["text"].is_string()) {
    throw Error(ErrorCode::kProtocolError, "/complete: missing string field 'text'");
  }
  return body["text"].get<std::string>();
}

std::map<std::string, double> HttpBackend::Classify(const Transcript& t,
                                                    const std::vector<std::string>& labels) {
  auto [status, body] = impl_->Post("/classify", {{"messages", Messages(t)}, {"labels", labels}});
  std::map<std::string, double> out;
  try {
    if (body.contains("probabilities") && body["probabilities"].is_object()) {
      for (const auto& [k, v] : body["probabilities"].items()) out[k] = v.get<double>();
    } else if (body.contains("logprobs") && body["logprobs"].is_object()) {
      for (const auto& [k, v] : body["logprobs"].items()) out[k] = std::exp(v.get<double>());
    } else {
      throw Error(ErrorCode::kLabelsUnscorable, "/classify returned neither probabilities nor logprobs");
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kProtocolError, std::string("/classify: ") + e.what());
  }
  return out;
}

std::vector<RawProposal> HttpBackend::Infill(std::string_view prefix, std::string_view suffix,
                                             std::size_t n) {
  auto [status, body] = impl_->Post(
      "/infill", {{"prefix", std::string(prefix)}, {"suffix", std::string(suffix)}, {"n", n}}, {404});
  std::vector<RawProposal> out;
  if (status == 404) {
    std::ostringstream prompt;
    prompt << "List " << n
           << " candidate variable names for the position marked <mask> in the code below, one "
              "identifier per line, best first, nothing else.\n\n"
           << prefix << "<mask>" << suffix;
    std::string text = Complete({{Role::kUser, prompt.str()}}, {n * 8 + 16, 0.0});
    std::istringstream lines(text);
    std::string line;
    while (std::getline(lines, line) && out.size() < n) {
      line = TrimBullet(line);
      if (line.empty()) continue;
      out.push_back({{line}, -static_cast<double>(out.size())});
    }
    return out;
  }
  try {
    for (const auto& p : body.at("proposals")) {
      RawProposal rp;
      if (p.contains("tokens")) {
        rp.pieces = p.at("tokens").get<std::vector<std::string>>();
      } else {
        rp.pieces = {p.at("token").get<std::string>()};
      }
      rp.score = p.value("score", -static_cast<double>(out.size()));
      out.push_back(std::move(rp));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kProtocolError, std::string("/infill: ") + e.what());
  }
  return out;
}

std::vector<double> HttpBackend::Embed(std::string_view text) {
  auto [status, body] = impl_->Post("/embed", {{"text", std::string(text)}});
  try {
    auto values = body.at("embedding").get<std::vector<double>>();
    if (body.contains("encoder") && body["encoder"].is_string()) {
      std::lock_guard<std::mutex> lock(impl_->mu);
      impl_->encoder_id = body["encoder"].get<std::string>();
    }
    return values;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kProtocolError, std::string("/embed: ") + e.what());
  }
}

std::vector<TokenLogProb> HttpBackend::LogProbs(std::string_view text) {
  auto [status, body] = impl_->Post("/logprobs", {{"text", std::string(text)}}, {404, 501});
  if (status == 404 || status == 501) {
    throw Error(ErrorCode::kScoringUnsupported, impl_->url + " does not score tokens");
  }
  std::vector<TokenLogProb> out;
  try {
    for (const auto& t : body.at("tokens")) {
      out.push_back({t.at("token").get<std::string>(), t.at("logprob").get<double>()});
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kProtocolError, std::string("/logprobs: ") + e.what());
  }
  return out;
}

}  // namespace iclforge::modelgw
