#include <stdio.h>

void main() {
    FILE* fp = fopen("data.txt", "r");
    fgets_line(fp);
    fclose(fp);
    fclose(fp);
}
