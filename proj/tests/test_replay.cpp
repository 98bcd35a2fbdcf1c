#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "fusesim/replay.hpp"
#include "fusesim/util.hpp"

using namespace fusesim;

namespace {

std::string temp_path(const char* name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("load_requests parses and validates") {
    std::string path = temp_path("fusesim_requests_test.txt");
    write_file(path,
               "# id np nd\n"
               "0 232 70\n"
               "1 32 4\n"
               "\n"
               "2 512 256  # boundary values\n");
    std::vector<Request> reqs = load_requests(path);
    REQUIRE(reqs.size() == 3);
    CHECK(reqs[0].prefill_tokens == 232);
    CHECK(reqs[2].decode_tokens == 256);

    write_file(path, "0 600 70\n");
    CHECK_THROWS_AS(load_requests(path), ParseError);

    write_file(path, "");
    CHECK(load_requests(path).empty());
    std::remove(path.c_str());
}

TEST_CASE("synthesize_requests is deterministic, bounded, and lands on the trace means") {
    std::vector<Request> a = synthesize_requests(200, 0);
    std::vector<Request> b = synthesize_requests(200, 0);
    REQUIRE(a.size() == 200);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].prefill_tokens == b[i].prefill_tokens);
        CHECK(a[i].decode_tokens == b[i].decode_tokens);
        CHECK(a[i].prefill_tokens >= 1);
        CHECK(a[i].prefill_tokens <= kMaxPrefillTokens);
        CHECK(a[i].decode_tokens >= 1);
        CHECK(a[i].decode_tokens <= kMaxDecodeTokens);
    }
    double mnp = 0, mnd = 0;
    for (const Request& r : a) {
        mnp += r.prefill_tokens;
        mnd += r.decode_tokens;
    }
    mnp /= a.size();
    mnd /= a.size();
    CHECK(mnp >= 209);
    CHECK(mnp <= 256);
    CHECK(mnd >= 63);
    CHECK(mnd <= 77);

    // different seeds give different streams
    std::vector<Request> c = synthesize_requests(200, 1);
    bool any_diff = false;
    for (std::size_t i = 0; i < c.size(); ++i)
        if (c[i].prefill_tokens != a[i].prefill_tokens) any_diff = true;
    CHECK(any_diff);
}

TEST_CASE("single-request replay satisfies the E2E identity") {
    Calibration c = default_calibration();
    std::vector<Request> reqs = {{0, 32, 4}};
    ReplayReport r = replay(c, ReplayPolicy::gov(), reqs);
    REQUIRE(r.per_request.size() == 1);
    const RequestResult& rr = r.per_request[0];
    CHECK(rr.e2e == doctest::Approx(rr.ttft + 3 * rr.tpot).epsilon(1e-12));
    CHECK(r.total_energy_mj == doctest::Approx(rr.energy).epsilon(1e-12));
    CHECK(r.total_mah ==
          doctest::Approx(r.total_energy_mj / (kNominalVoltage * 3600.0)).epsilon(1e-12));
}

TEST_CASE("compare_reports ratios and mismatch detection") {
    Calibration c = default_calibration();
    std::vector<Request> reqs = {{0, 32, 2}, {1, 64, 3}};
    ReplayReport r = replay(c, ReplayPolicy::gov(), reqs);
    for (const CompareRow& row : compare_reports(r, r)) CHECK(row.ratio == doctest::Approx(1.0));

    ReplayReport half = r;
    half.mean_tpot = r.mean_tpot / 2;
    CHECK(compare_reports(r, half)[1].ratio == doctest::Approx(0.5));

    ReplayReport mismatched = r;
    mismatched.per_request[1].id = 99;
    CHECK_THROWS_AS(compare_reports(r, mismatched), SimError);
}

TEST_CASE("replay CSV outputs") {
    Calibration c = default_calibration();
    ReplayReport r = replay(c, ReplayPolicy::gov(), {{0, 32, 2}});
    std::string csv = replay_report_to_csv(r);
    CHECK(csv.rfind("policy,request_id,ttft_ms,tpot_ms,e2e_ms,energy_mj\n", 0) == 0);
    std::string cmp = compare_to_csv(compare_reports(r, r));
    CHECK(cmp.rfind("metric,base,other,ratio\n", 0) == 0);
}
