#include <doctest.h>

TEST_SUITE("adjoint") {}
