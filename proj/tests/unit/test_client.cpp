#include <atomic>
#include <chrono>
#include <string>
#include <thread>

#include <doctest.h>
#include <httplib.h>

#include "cade/client.hpp"

using namespace cade;

namespace {

struct MockServer {
  httplib::Server server;
  std::thread thread;
  int port = 0;

  explicit MockServer(httplib::Server::Handler handler) {
    server.Post("/logits", std::move(handler));
    port = server.bind_to_any_port("127.0.0.1");
    thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }

  ~MockServer() {
    server.stop();
    thread.join();
  }

  std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port); }
};

client::LogitRequest three_candidate_request() {
  client::LogitRequest req;
  req.record_id = "r1";
  req.view = ViewKind::FULL;
  req.candidates = {"A", "B", "C"};
  return req;
}

client::ClientConfig fast_retries() {
  client::ClientConfig cfg;
  cfg.backoff_base = std::chrono::milliseconds(5);
  return cfg;
}

}  // namespace

TEST_CASE("default endpoint comes from the environment") {
  unsetenv("CADE_ENDPOINT");
  CHECK_THROWS_AS(client::default_endpoint(), InvalidInput);
  setenv("CADE_ENDPOINT", "http://127.0.0.1:9", 1);
  CHECK(client::default_endpoint() == "http://127.0.0.1:9");
  unsetenv("CADE_ENDPOINT");
}

TEST_CASE("fetch_view_logits accepts a well-formed response") {
  MockServer mock([](const httplib::Request& req, httplib::Response& res) {
    auto body = nlohmann::json::parse(req.body);
    CHECK(body["id"] == "r1");
    CHECK(body["view"] == "full");
    CHECK(body["candidates"].size() == 3);
    res.set_content(R"({"logits":[0,0,0]})", "application/json");
  });
  auto logits = client::fetch_view_logits(mock.endpoint(), three_candidate_request(), fast_retries());
  CHECK(logits == std::vector<double>{0, 0, 0});
}

TEST_CASE("length mismatch is a protocol error") {
  MockServer mock([](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"logits":[1.0,2.0]})", "application/json");
  });
  CHECK_THROWS_AS(client::fetch_view_logits(mock.endpoint(), three_candidate_request(), fast_retries()),
                  ProtocolError);
}

TEST_CASE("malformed responses fail without retrying") {
  MockServer mock([](const httplib::Request&, httplib::Response& res) {
    res.set_content("not json", "application/json");
  });
  CHECK_THROWS_AS(client::fetch_view_logits(mock.endpoint(), three_candidate_request(), fast_retries()),
                  ProtocolError);
}

TEST_CASE("transient failures succeed after retries") {
  std::atomic<int> calls{0};
  MockServer mock([&calls](const httplib::Request&, httplib::Response& res) {
    if (++calls <= 2) {
      res.status = 503;
      return;
    }
    res.set_content(R"({"logits":[1.5,-0.5,0.25]})", "application/json");
  });
  auto logits = client::fetch_view_logits(mock.endpoint(), three_candidate_request(), fast_retries());
  CHECK(calls == 3);
  CHECK(logits[0] == doctest::Approx(1.5));
}

TEST_CASE("exhausted retries raise EndpointUnavailable") {
  std::atomic<int> calls{0};
  MockServer mock([&calls](const httplib::Request&, httplib::Response& res) {
    ++calls;
    res.status = 500;
  });
  CHECK_THROWS_AS(client::fetch_view_logits(mock.endpoint(), three_candidate_request(), fast_retries()),
                  EndpointUnavailable);
  CHECK(calls == 3);
}

TEST_CASE("unreachable endpoint raises EndpointUnavailable") {
  client::ClientConfig cfg = fast_retries();
  cfg.timeout_seconds = 1;
  CHECK_THROWS_AS(client::fetch_view_logits("http://127.0.0.1:1", three_candidate_request(), cfg),
                  EndpointUnavailable);
}

TEST_CASE("non-finite logits are rejected") {
  MockServer mock([](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"logits":[1.0,null,0.0]})", "application/json");
  });
  CHECK_THROWS_AS(client::fetch_view_logits(mock.endpoint(), three_candidate_request(), fast_retries()),
                  ProtocolError);
}
