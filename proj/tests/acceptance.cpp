// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.
#include <cstdio>

#include "fowler_lab/verify.hpp"

int main() {
    using namespace fowler_lab;
    int failed = 0;
    for (const auto& suite : suites()) {
        const auto r = suite.run({});
        std::printf("%s criterion %2d  %-16s %-55s %8.2f s\n", r.passed ? "PASS" : "FAIL", r.id, r.suite.c_str(),
                    r.title.c_str(), r.seconds);
        for (const auto& [name, value] : r.values) std::printf("      %-44s %.10g\n", name.c_str(), value);
        for (const auto& [name, seconds] : r.timings) std::printf("      %-44s %.2f s\n", name.c_str(), seconds);
        for (const auto& f : r.failures) std::printf("      failure: %s\n", f.c_str());
        std::fflush(stdout);
        if (!r.passed) ++failed;
    }
    std::printf("%d of %zu criteria failed\n", failed, suites().size());
    return failed == 0 ? 0 : 1;
}
