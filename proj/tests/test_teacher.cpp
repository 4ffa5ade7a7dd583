#include "doctest.h"

TEST_SUITE_BEGIN("teacher");
TEST_SUITE_END();
