#include "wdst/pipeline.hpp"

int main(int argc, char** argv) { return wdst::cli_main(argc, argv); }
