#include <doctest.h>

TEST_SUITE("forward") {}
