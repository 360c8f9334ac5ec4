#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <string>

#include "satint/io.hpp"

// Process-level checks of the CLI contract: exit code 0 on success, 1 on
// domain errors, 2 on usage errors.

namespace {

int run(const std::string& args) {
    const std::string cmd = std::string(SATINT_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

}  // namespace

TEST_CASE("cli: good simulate run writes a parseable trajectory") {
    const std::string out = "/tmp/satint_cli_traj.csv";
    CHECK(run("simulate --plant linear1d --k 0.1 --r 0.5 --horizon 5 --out " + out) == 0);
    const satint::CsvTable table = satint::read_csv(out);
    CHECK(table.header.front() == "t");
    CHECK(table.header.back() == "wcoord");
    CHECK(table.rows.size() > 100);
}

TEST_CASE("cli: usage errors exit with 2") {
    CHECK(run("simulate --plant linear1d --k 0.1 --r 2.0") == 2);   // r outside (y_min, y_max)
    CHECK(run("simulate --plant nonsense --k 0.1 --r 0.5") == 2);   // unknown plant
    CHECK(run("roa --plant linear1d --grid x1:0:1:0,u:-1:1:3") == 2);  // zero-resolution axis
    CHECK(run("roa --plant linear1d --grid bogus") == 2);
    CHECK(run("lemma-check --plant linear1d --lemma nope") == 2);
    CHECK(run("simulate --plant linear1d --k 0.1 --r 0.5 --x0 1,2,3") == 2);  // wrong dimension
    CHECK(run("frobnicate") == 2);  // unknown subcommand
}

TEST_CASE("cli: domain errors exit with 1") {
    // Unstable plant passes parsing and map building but fails certification.
    const std::string config = "/tmp/satint_cli_unstable.json";
    {
        std::ofstream out(config);
        out << R"({"name":"unstable","n":1,"umin":-1,"umax":1,)"
            << R"("f":[[{"coeff":1.0,"powers":[1,0]},{"coeff":1.0,"powers":[0,1]}]],)"
            << R"("g":[{"coeff":-1.0,"powers":[1]}]})";
    }
    CHECK(run("certify --plant " + config + " --n-u 5 --out-prefix /tmp/satint_cli_unst") == 1);
}
