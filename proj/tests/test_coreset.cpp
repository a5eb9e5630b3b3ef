#include "doctest.h"

TEST_SUITE("coreset") {}
