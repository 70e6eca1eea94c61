#include <doctest.h>

TEST_SUITE("smp") {}
