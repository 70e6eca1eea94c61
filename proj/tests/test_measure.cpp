#include <doctest.h>

TEST_SUITE("measure") {}
