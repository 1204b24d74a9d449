import init, { classify, dualize, solve } from "./pkg/zmc_web.js";

const $ = (id) => document.getElementById(id);

// Defaults per operation: the helicoid dualizes to the Lorentzian catenoid,
// whose boundary values make a maximal Dirichlet problem.
const presets = {
  classify: { expr: "y + sin(x)", domain: "0,6.283185307179586,-1,1" },
  dualize: { expr: "atan2(y, x)", domain: "1,2,1,2", base: "-1.1462158347805889" },
  solve: { expr: "-asinh(sqrt(x^2 + y^2))", domain: "1,2,1,2" },
};

const op = () => document.querySelector("input[name=op]:checked").value;

function selectOp() {
  const p = presets[op()];
  $("expr").value = p.expr;
  $("domain").value = p.domain;
  if (p.base) $("base").value = p.base;
  for (const el of document.querySelectorAll("[data-op]")) el.hidden = el.dataset.op !== op();
}

// Blue to red through white.
function colour(t) {
  const c = Math.max(0, Math.min(1, t));
  return c < 0.5
    ? [255 * 2 * c, 255 * 2 * c, 255]
    : [255, 255 * 2 * (1 - c), 255 * 2 * (1 - c)];
}

function paint(doc) {
  const { nx, ny, values } = doc;
  const canvas = $("plot");
  canvas.width = nx;
  canvas.height = ny;
  const ctx = canvas.getContext("2d");
  const img = ctx.createImageData(nx, ny);
  const finite = values.filter(Number.isFinite);
  const lo = Math.min(...finite);
  const hi = Math.max(...finite);
  const span = hi > lo ? hi - lo : 1;
  for (let j = 0; j < ny; j++) {
    for (let i = 0; i < nx; i++) {
      const k = j * nx + i;
      const light = doc.classes && doc.classes[k].startsWith("light");
      const rgb = light ? [0, 0, 0] : colour((values[k] - lo) / span);
      // Row 0 is y0; draw it at the bottom.
      const o = 4 * ((ny - 1 - j) * nx + i);
      img.data.set([...rgb, 255], o);
    }
  }
  ctx.putImageData(img, 0, 0);
  return [lo, hi];
}

function summary(doc, [lo, hi]) {
  const lines = [`${doc.nx} x ${doc.ny} nodes, values in [${lo.toPrecision(6)}, ${hi.toPrecision(6)}]`];
  if (doc.classes) {
    const counts = {};
    for (const c of doc.classes) counts[c] = (counts[c] || 0) + 1;
    for (const [c, k] of Object.entries(counts)) lines.push(`${c}: ${k}`);
  }
  if (doc.path_defect !== undefined) lines.push(`path defect: ${doc.path_defect.toExponential(2)}`);
  if (doc.iterations !== undefined) {
    lines.push(`Newton iterations: ${doc.iterations}`);
    lines.push("residual history: " + doc.residual_history.map((r) => r.toExponential(2)).join(", "));
    if (doc.min_b !== null) lines.push(`min B: ${doc.min_b.toPrecision(6)}`);
  }
  return lines.join("\n");
}

function run() {
  const info = $("info");
  const domain = new Float64Array($("domain").value.split(",").map(Number));
  const n = Number($("n").value);
  const expr = $("expr").value;
  let text;
  switch (op()) {
    case "classify":
      text = classify(expr, domain, n);
      break;
    case "dualize":
      text = dualize(expr, domain, n, $("direction").value === "potential", Number($("epsilon").value), Number($("base").value));
      break;
    case "solve":
      text = solve($("equation").value, expr, domain, n);
      break;
  }
  const doc = JSON.parse(text);
  info.classList.toggle("error", Boolean(doc.error));
  info.textContent = doc.error ? `${doc.error.kind}: ${doc.error.message}` : summary(doc, paint(doc));
}

await init();
for (const r of document.querySelectorAll("input[name=op]")) r.addEventListener("change", selectOp);
$("run").addEventListener("click", run);
selectOp();
run();
