#include "textlime/cli.hpp"

int main(int argc, char** argv) { return textlime::run_cli(argc, argv); }
