#include <doctest.h>

TEST_SUITE("variation") {}
