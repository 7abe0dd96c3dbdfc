#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "oscifd/config.hpp"

using namespace oscifd;

namespace {

ExperimentConfig load_string(const std::string& text) {
    std::istringstream in(text);
    return load_config(toml::parse(in));
}

const char* kBaseConfig = R"(
# small-eps crank-nicolson experiment
[physics]
epsilon = 1e-3
kappa = 1.0
lambda = 1.0
domain_left = -4.0
domain_right = 4.0
final_time = 1.0
envelope = "gaussian"
envelope_sigma = 1.0

[discretization]
mode = "planner"
rho = 4.0
alpha_branch = 1
beta_branch = 1
theta_max = 0.9

[scheme]
name = "crank_nicolson"
cn_tol = 1e-14

[reference]
enabled = false

[output]
stride = 4
)";

} // namespace

TEST_CASE("a complete config parses") {
    const ExperimentConfig cfg = load_string(kBaseConfig);
    CHECK(cfg.setup.epsilon == 1e-3);
    CHECK(cfg.mode == DiscretizationMode::planner);
    CHECK(cfg.rho == 4.0);
    CHECK(cfg.scheme == SchemeChoice::crank_nicolson);
    CHECK(cfg.cn.fixed_point_tol == 1e-14);
    CHECK(cfg.stride == 4);
    CHECK_FALSE(cfg.reference_enabled);
}

TEST_CASE("unknown keys are rejected") {
    std::string bad = kBaseConfig;
    bad += "\n[physics]\n";  // duplicate section is fine; unknown key is not
    CHECK_THROWS_AS(load_string(bad + "epsilonn = 2.0\n"), ConfigError);
    CHECK_THROWS_AS(load_string(std::string(kBaseConfig) + "\n[misc]\nx = 1\n"), ConfigError);
}

TEST_CASE("mode keys are strictly separated") {
    // planner keys in direct mode are unknown keys
    std::string direct = R"(
[physics]
epsilon = 1.0
kappa = 1.0
lambda = 1.0
final_time = 1.0

[discretization]
mode = "direct"
tau = 0.04
h = 0.4
rho = 4.0

[scheme]
name = "leapfrog"
)";
    CHECK_THROWS_AS(load_string(direct), ConfigError);
}

TEST_CASE("direct mode needs a tau") {
    std::string direct = R"(
[physics]
epsilon = 1.0
kappa = 1.0
lambda = 1.0
final_time = 1.0

[discretization]
mode = "direct"
h = 0.4

[scheme]
name = "leapfrog"
)";
    CHECK_THROWS_AS(load_string(direct), ConfigError);
}

TEST_CASE("missing required sections fail") {
    CHECK_THROWS_AS(load_string("[physics]\nepsilon = 1.0\n"), ConfigError);
}

TEST_CASE("duplicate keys are rejected") {
    CHECK_THROWS_AS(load_string(std::string(kBaseConfig) + "\n[output]\nstride = 4\n"), ConfigError);
}

TEST_CASE("toml subset parses scalars, strings, booleans and arrays") {
    std::istringstream in(R"(
[sec]
a = 1
b = 2.5            # trailing comment
c = "text # not a comment"
d = true
e = [1, 2.5, -3e-2]
f = ["x", "y"]
g = [1,
     2,
     3]
)");
    const toml::Document doc = toml::parse(in);
    const toml::Table& t = doc.at("sec");
    CHECK(std::get<long>(t.at("a")) == 1);
    CHECK(std::get<double>(t.at("b")) == 2.5);
    CHECK(std::get<std::string>(t.at("c")) == "text # not a comment");
    CHECK(std::get<bool>(t.at("d")) == true);
    CHECK(std::get<std::vector<double>>(t.at("e")) == std::vector<double>{1.0, 2.5, -3e-2});
    CHECK(std::get<std::vector<std::string>>(t.at("f")) == std::vector<std::string>{"x", "y"});
    CHECK(std::get<std::vector<double>>(t.at("g")).size() == 3);
}

TEST_CASE("malformed lines are parse errors") {
    std::istringstream a("[sec]\nkey\n");
    CHECK_THROWS_AS(toml::parse(a), ConfigError);
    std::istringstream b("key = 1\n");
    CHECK_THROWS_AS(toml::parse(b), ConfigError);  // key outside section
    std::istringstream c("[sec]\nk = [1, 2\n");
    CHECK_THROWS_AS(toml::parse(c), ConfigError);  // unterminated array (EOF)
    std::istringstream d("[sec]\nk = \"abc\n");
    CHECK_THROWS_AS(toml::parse(d), ConfigError);  // unterminated string
}

TEST_CASE("tabulated envelope round-trips through the config") {
    std::string tab = R"(
[physics]
epsilon = 1.0
kappa = 1.0
lambda = 1.0
domain_left = 0.0
domain_right = 6.283185307179586
final_time = 1.0
envelope = "tabulated"
envelope_samples_re = [1.0, 0.0, -1.0, 0.0]
envelope_samples_im = [0.0, 1.0, 0.0, -1.0]

[discretization]
mode = "direct"
tau = 0.1
h = 1.5707963267948966

[scheme]
name = "crank_nicolson"
)";
    const ExperimentConfig cfg = load_string(tab);
    const auto* prof = std::get_if<TabulatedProfile>(&cfg.setup.envelope);
    REQUIRE(prof != nullptr);
    CHECK(prof->samples.size() == 4);
    // sample values are reproduced at the tabulation nodes
    CHECK(std::abs(envelope_value(cfg.setup.envelope, cfg.setup, 0.0) - Complex(1, 0)) < 1e-12);
    CHECK(std::abs(envelope_value(cfg.setup.envelope, cfg.setup, 1.5707963267948966) - Complex(0, 1)) < 1e-12);
}

TEST_CASE("both as a scheme needs explicit splitting") {
    std::string both = kBaseConfig;
    both.replace(both.find("crank_nicolson"), 14, "both");
    const ExperimentConfig cfg = load_string(both);
    CHECK(cfg.scheme == SchemeChoice::both);
    CHECK_THROWS_AS(cfg.single_scheme(), ConfigError);
}
