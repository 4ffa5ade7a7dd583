#include "doctest.h"

TEST_SUITE_BEGIN("selection");
TEST_SUITE_END();
