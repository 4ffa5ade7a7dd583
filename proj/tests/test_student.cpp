#include "doctest.h"

TEST_SUITE_BEGIN("student");
TEST_SUITE_END();
