/**
 * Minimal canvas 2D charts: Pareto scatter with the current-design
 * marker, polar curves, and the optimization incumbent curve.  No chart
 * library so the bundle stays dependency-light.
 */

export interface XY {
  x: number;
  y: number;
}

export interface Series {
  label: string;
  points: XY[];
  color: string;
  /** indices drawn with an out-of-range marker */
  flagged?: number[];
  line?: boolean;
}

interface Extent {
  xMin: number;
  xMax: number;
  yMin: number;
  yMax: number;
}

function extentOf(series: Series[]): Extent {
  let xMin = Infinity;
  let xMax = -Infinity;
  let yMin = Infinity;
  let yMax = -Infinity;
  for (const s of series) {
    for (const p of s.points) {
      if (p.x < xMin) xMin = p.x;
      if (p.x > xMax) xMax = p.x;
      if (p.y < yMin) yMin = p.y;
      if (p.y > yMax) yMax = p.y;
    }
  }
  if (!Number.isFinite(xMin)) return { xMin: 0, xMax: 1, yMin: 0, yMax: 1 };
  const padX = (xMax - xMin || 1) * 0.06;
  const padY = (yMax - yMin || 1) * 0.06;
  return {
    xMin: xMin - padX,
    xMax: xMax + padX,
    yMin: yMin - padY,
    yMax: yMax + padY,
  };
}

export function drawChart(
  canvas: HTMLCanvasElement,
  series: Series[],
  xLabel: string,
  yLabel: string,
): void {
  const ctx = canvas.getContext('2d');
  if (!ctx) return;
  const { width, height } = canvas;
  const m = { left: 48, right: 10, top: 10, bottom: 30 };
  ctx.clearRect(0, 0, width, height);
  ctx.fillStyle = '#1f2937';
  ctx.fillRect(0, 0, width, height);

  const ext = extentOf(series);
  const sx = (x: number) =>
    m.left + ((x - ext.xMin) / (ext.xMax - ext.xMin)) * (width - m.left - m.right);
  const sy = (y: number) =>
    height - m.bottom - ((y - ext.yMin) / (ext.yMax - ext.yMin)) * (height - m.top - m.bottom);

  ctx.strokeStyle = '#4b5563';
  ctx.strokeRect(m.left, m.top, width - m.left - m.right, height - m.top - m.bottom);
  ctx.fillStyle = '#9ca3af';
  ctx.font = '11px sans-serif';
  ctx.fillText(xLabel, width / 2 - 20, height - 8);
  ctx.save();
  ctx.translate(12, height / 2 + 20);
  ctx.rotate(-Math.PI / 2);
  ctx.fillText(yLabel, 0, 0);
  ctx.restore();

  let legendY = m.top + 12;
  for (const s of series) {
    ctx.strokeStyle = s.color;
    ctx.fillStyle = s.color;
    if (s.line && s.points.length > 1) {
      ctx.beginPath();
      s.points.forEach((p, i) => {
        if (i === 0) ctx.moveTo(sx(p.x), sy(p.y));
        else ctx.lineTo(sx(p.x), sy(p.y));
      });
      ctx.stroke();
    }
    for (const [i, p] of s.points.entries()) {
      ctx.beginPath();
      ctx.arc(sx(p.x), sy(p.y), 2.5, 0, 2 * Math.PI);
      ctx.fill();
      if (s.flagged?.includes(i)) {
        ctx.strokeStyle = '#f87171';
        ctx.beginPath();
        ctx.moveTo(sx(p.x) - 5, sy(p.y) - 5);
        ctx.lineTo(sx(p.x) + 5, sy(p.y) + 5);
        ctx.moveTo(sx(p.x) - 5, sy(p.y) + 5);
        ctx.lineTo(sx(p.x) + 5, sy(p.y) - 5);
        ctx.stroke();
        ctx.strokeStyle = s.color;
      }
    }
    ctx.fillText(s.label, width - m.right - 120, legendY);
    legendY += 14;
  }
}
