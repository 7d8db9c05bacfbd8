#include <cstdio>
int main(int argc, char** argv) {
    if (argc < 3) { std::puts("0"); return 0; }
    FILE* fin = std::fopen(argv[1], "rb");
    FILE* fout = std::fopen(argv[2], "rb");
    if (!fin || !fout) { std::puts("0"); return 0; }
    long long n;
    if (std::fscanf(fin, "%lld", &n) != 1) { std::puts("0"); return 0; }
    long long best = -9223372036854775807LL, v;
    for (long long i = 0; i < n; i++) {
        if (std::fscanf(fin, "%lld", &v) != 1) { std::puts("0"); return 0; }
        if (v > best) best = v;
    }
    long long got;
    if (std::fscanf(fout, "%lld", &got) != 1) { std::puts("0"); return 0; }
    std::puts(got == best ? "1" : "0");
    return 0;
}
