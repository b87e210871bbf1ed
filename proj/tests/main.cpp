#define DOCTEST_CONFIG_IMPLEMENT

#include <doctest.h>

#include "rbspec/constants.hpp"

#include <string>

int main(int argc, char** argv) {
    // Point the global table at the repository data file regardless of the
    // environment the tests run under.
    rbspec::load_constants(std::string(RBSPEC_TEST_DATA_DIR) +
                           "/rb_constants.txt");
    doctest::Context context;
    context.applyCommandLine(argc, argv);
    return context.run();
}
