#include <gtest/gtest.h>

#include <atomic>
#include <sstream>
#include <thread>

#include "canonimanip/checker.hpp"
#include "canonimanip/errors.hpp"
#include "canonimanip/json_io.hpp"
#include "support.hpp"

// After Eigen: the socket headers define macros that clash with it.
#include <httplib.h>

using namespace canonimanip;
using namespace testing_support;
using Kind = CheckVerdict::Kind;

namespace {

CheckRequest dummy_request() {
  CheckRequest r;
  r.task_instruction = "pour";
  r.action = Action::Pour;
  r.active_id = "a";
  r.passive_id = "p";
  r.candidate = make_constraint("a", Vec3::Zero(), Vec3::UnitX(), "p", Vec3::Zero(), Vec3::UnitZ(), 0.05, 1.0);
  r.image = RenderedImage(4, 3, palette::kBackground);
  return r;
}

// Active "a" with a functional axis along +x, passive "p" far away, no bystanders.
Scene functional_scene() {
  auto a = make_object("a", {{0, 0, 0}, {0.01, 0, 0}});
  a->functional_axis = Vec3::UnitX();
  Scene s;
  s.objects.push_back(place(a));
  s.objects.push_back(place(make_object("p", {{0, 0, 0}}), Pose::from_translation({0.5, 0, 0})));
  return s;
}

CheckRequest request_with_direction(const Vec3& d) {
  CheckRequest r = dummy_request();
  r.candidate = make_constraint("a", Vec3::Zero(), d, "p", Vec3::Zero(), Vec3::UnitZ(), 0.05, 0.0);
  return r;
}

class StubServer {
 public:
  explicit StubServer(std::function<void(const httplib::Request&, httplib::Response&)> handler) {
    server_.Post("/check", [this, handler](const httplib::Request& q, httplib::Response& r) {
      ++hits;
      last_body = q.body;
      handler(q, r);
    });
    port = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~StubServer() {
    server_.stop();
    thread_.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port); }

  int port = 0;
  std::atomic<int> hits{0};
  std::string last_body;

 private:
  httplib::Server server_;
  std::thread thread_;
};

}  // namespace

TEST(Verdict, NamesRoundTrip) {
  for (Kind k : {Kind::Success, Kind::Failure, Kind::Refine}) EXPECT_EQ(parse_verdict(verdict_name(k)), k);
  EXPECT_THROW(parse_verdict("Success"), InvalidArgument);
  EXPECT_THROW(parse_verdict("ok"), InvalidArgument);
}

TEST(Scripted, ReplaysThenExhausts) {
  ScriptedChecker one({Kind::Success});
  EXPECT_EQ(one.check(dummy_request()).kind, Kind::Success);

  ScriptedChecker two({Kind::Failure, Kind::Refine});
  EXPECT_EQ(two.check(dummy_request()).kind, Kind::Failure);
  EXPECT_EQ(two.check(dummy_request()).kind, Kind::Refine);
  EXPECT_THROW(two.check(dummy_request()), ScriptExhausted);
  EXPECT_EQ(two.calls(), 2u);
}

TEST(Geometric, SuccessRefineFailure) {
  GeometricChecker g(functional_scene());
  EXPECT_EQ(g.check(request_with_direction(Vec3::UnitX())).kind, Kind::Success);
  const Vec3 off20 = Rotation::from_axis_angle(Vec3::UnitZ(), deg(20)).rotate(Vec3::UnitX());
  EXPECT_EQ(g.check(request_with_direction(off20)).kind, Kind::Refine);
  EXPECT_EQ(g.check(request_with_direction(-Vec3::UnitX())).kind, Kind::Failure);
  const Vec3 off40 = Rotation::from_axis_angle(Vec3::UnitZ(), deg(40)).rotate(Vec3::UnitX());
  EXPECT_EQ(g.check(request_with_direction(off40)).kind, Kind::Failure);
}

TEST(Geometric, WithinToleranceCountsAsSuccess) {
  GeometricChecker g(functional_scene());
  const Vec3 off3 = Rotation::from_axis_angle(Vec3::UnitZ(), deg(3)).rotate(Vec3::UnitX());
  EXPECT_EQ(g.check(request_with_direction(off3)).kind, Kind::Success);
}

TEST(Geometric, BystanderCollisionFails) {
  Scene s = functional_scene();
  // Target spot for the active point is 5 cm above p; park a bystander there.
  s.objects.push_back(place(make_object("b", {{0, 0, 0}}), Pose::from_translation({0.5, 0, 0.05})));
  GeometricChecker g(s);
  EXPECT_EQ(g.check(request_with_direction(Vec3::UnitX())).kind, Kind::Failure);
}

TEST(Geometric, UnknownObject) {
  GeometricChecker g(functional_scene());
  CheckRequest r = request_with_direction(Vec3::UnitX());
  r.candidate.passive.object_id = "mug";
  EXPECT_THROW(g.check(r), UnknownObject);
}

TEST(Wire, RequestCarriesCandidateAndImage) {
  const json j = json::parse(encode_check_request(dummy_request()));
  EXPECT_EQ(j["task"], "pour");
  EXPECT_EQ(j["stage"]["action"], "pour");
  EXPECT_EQ(j["stage"]["refine"], false);
  EXPECT_EQ(j["candidate"]["direction"], json::array({1.0, 0.0, 0.0}));
  EXPECT_EQ(j["candidate"]["distance_m"], 0.05);
  EXPECT_EQ(j["image"]["format"], "ppm");
  EXPECT_EQ(j["image"]["base64"], base64_encode(encode_ppm(dummy_request().image)));
}

TEST(Wire, DecodeResponses) {
  EXPECT_EQ(decode_check_response(R"({"verdict":"success"})").kind, Kind::Success);
  const CheckVerdict r = decode_check_response(R"({"verdict":"refine","reason":"axis misaligned"})");
  EXPECT_EQ(r.kind, Kind::Refine);
  EXPECT_EQ(r.reason, "axis misaligned");
  EXPECT_THROW(decode_check_response(R"({"verdict":"maybe"})"), OracleUnavailable);
  EXPECT_THROW(decode_check_response("not json"), OracleUnavailable);
  EXPECT_THROW(decode_check_response(R"({"reason":"x"})"), OracleUnavailable);
}

TEST(Base64, KnownVectors) {
  EXPECT_EQ(base64_encode(""), "");
  EXPECT_EQ(base64_encode("f"), "Zg==");
  EXPECT_EQ(base64_encode("fo"), "Zm8=");
  EXPECT_EQ(base64_encode("foo"), "Zm9v");
  EXPECT_EQ(base64_encode("foobar"), "Zm9vYmFy");
}

TEST(Remote, MapsServerVerdicts) {
  StubServer server([](const httplib::Request&, httplib::Response& r) {
    r.set_content(R"({"verdict":"refine","reason":"axis misaligned"})", "application/json");
  });
  RemoteChecker c(server.url(), std::chrono::milliseconds(2000));
  const CheckVerdict v = c.check(dummy_request());
  EXPECT_EQ(v.kind, Kind::Refine);
  EXPECT_EQ(v.reason, "axis misaligned");
  EXPECT_EQ(json::parse(server.last_body)["stage"]["active"], "a");
}

TEST(Remote, Non200IsUnavailable) {
  StubServer server([](const httplib::Request&, httplib::Response& r) { r.status = 500; });
  RemoteChecker c(server.url(), std::chrono::milliseconds(2000));
  EXPECT_THROW(c.check(dummy_request()), OracleUnavailable);
}

TEST(Remote, TimeoutIsUnavailable) {
  StubServer server([](const httplib::Request&, httplib::Response& r) {
    std::this_thread::sleep_for(std::chrono::milliseconds(600));
    r.set_content(R"({"verdict":"success"})", "application/json");
  });
  RemoteChecker c(server.url(), std::chrono::milliseconds(100));
  EXPECT_THROW(c.check(dummy_request()), OracleUnavailable);
}

TEST(Remote, RetryOnceOnTransportFault) {
  int port = 0;
  {
    httplib::Server probe;
    port = probe.bind_to_any_port("127.0.0.1");
  }
  RemoteChecker c("http://127.0.0.1:" + std::to_string(port), std::chrono::milliseconds(200), true);
  EXPECT_THROW(c.check(dummy_request()), OracleUnavailable);
  EXPECT_EQ(c.attempts(), 2u);
}

TEST(Remote, UrlWithoutSchemeRejected) {
  EXPECT_THROW(RemoteChecker("localhost:8080", std::chrono::milliseconds(10)), InvalidArgument);
}

TEST(Interactive, ParsesKeysAndEof) {
  const auto dir = std::filesystem::temp_directory_path();
  std::istringstream in("s\n  \nx\nr\nF\n");
  std::ostringstream out;
  InteractiveChecker c(in, out, dir);
  EXPECT_EQ(c.check(dummy_request()).kind, Kind::Success);
  EXPECT_EQ(c.check(dummy_request()).kind, Kind::Refine);
  EXPECT_EQ(c.check(dummy_request()).kind, Kind::Failure);
  EXPECT_THROW(c.check(dummy_request()), OracleUnavailable);
  EXPECT_NE(out.str().find("[s]uccess / [f]ail / [r]efine"), std::string::npos);
}
