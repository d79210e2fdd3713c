#include <math.h>
#include <stdio.h>
#include "vmifs.h"

int main(void) {
    VmifsDataset *raw = NULL, *ds = NULL;
    VmifsSelection *sel = NULL;
    if (vmifs_dataset_gen_tree(1000, 11, &raw) != VMIFS_STATUS_OK) return 1;
    if (vmifs_dataset_discretize(raw, 5, VMIFS_BIN_STRATEGY_EQUAL_FREQUENCY, &ds) != VMIFS_STATUS_OK) return 2;
    if (vmifs_select(ds, VMIFS_METHOD_VMI_NAIVE, 2, 0.1, &sel) != VMIFS_STATUS_OK) return 3;
    printf("%zu %zu\n", vmifs_selection_len(sel), vmifs_selection_feature(sel, 0));
    if (vmifs_dataset_gen_tree(0, 1, &raw) != VMIFS_STATUS_INVALID_ARGUMENT) return 4;
    printf("%s\n", vmifs_last_error_message());
    vmifs_selection_free(sel);
    vmifs_dataset_free(ds);
    return 0;
}
