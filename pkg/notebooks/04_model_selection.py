# %% [markdown]
# # Choosing the number of groups
#
# More groups always raise the likelihood, so the fit alone cannot pick
# c.  The description length adds the cost of coding the parameters and
# is minimal near the planted count.

# %%
from ssbm import FitConfig, GeneratorConfig, generate, select_groups

net = generate(GeneratorConfig(p_in=0.9, seed=3))
report = select_groups(net.graph, 1, 7, FitConfig(restarts=4, seed=3))
print(report.to_csv())
print("best c:", report.best_c)

# %% [markdown]
# The data term falls with c.  The parameter term is not monotone here:
# entries that a clean fit drives to zero cost nothing, so it dips at the
# planted count before growing again.

# %%
for row in report.per_c:
    bar = "#" * int((row.total_length - min(r.total_length for r in report.per_c)) / 25)
    print(f"c={row.c}  data {row.data_length:9.1f}  params {row.param_length:7.1f}  {bar}")
