// DOM rendering for the studio. Pure "state in, DOM out": every function
// rebuilds its region from scratch, so the view is always a function of the
// current state and never drifts from it.

import type { StudioState, StudioDocument, Suggestion, SlotRef } from './state.js';

export interface Handlers {
  onToggleMask(element: string, slot: number): void;
  onAccept(element: string, slot: number): void;
  onReject(element: string, slot: number): void;
  onCopy(hex: string): void;
}

function clear(node: HTMLElement): void {
  while (node.firstChild) node.removeChild(node.firstChild);
}

function pct(value: number): string {
  return `${(value * 100).toFixed(2)}%`;
}

function isMasked(masks: SlotRef[], element: string, slot: number): boolean {
  return masks.some((m) => m.element === element && m.slot === slot);
}

// Schematic preview: positioned rectangles colored by their palette, with one
// clickable chip per palette slot. Deliberately not a faithful render; it is
// just enough to judge how the colors sit together.
export function renderLayout(
  container: HTMLElement,
  doc: StudioDocument | null,
  masks: SlotRef[],
  handlers: Handlers,
): void {
  clear(container);
  if (!doc) return;
  const aspect = doc.layout && doc.layout.height > 0 ? doc.layout.width / doc.layout.height : 1;
  container.style.aspectRatio = String(aspect);
  for (const element of doc.elements) {
    const box = document.createElement('div');
    box.className = `element-box element-${element.type}`;
    box.dataset.element = element.id;
    box.style.left = pct(element.layout.x);
    box.style.top = pct(element.layout.y);
    box.style.width = pct(element.layout.width);
    box.style.height = pct(element.layout.height);
    box.style.background = element.color_palette[0] ?? 'transparent';

    const label = document.createElement('span');
    label.className = 'element-label';
    label.textContent = element.text ?? element.type;
    box.appendChild(label);

    const chips = document.createElement('div');
    chips.className = 'slot-chips';
    element.color_palette.forEach((hex, slot) => {
      const chip = document.createElement('button');
      chip.type = 'button';
      chip.className = 'slot-chip';
      chip.dataset.element = element.id;
      chip.dataset.slot = String(slot);
      chip.dataset.hex = hex;
      chip.style.background = hex;
      chip.title = `${element.id}[${slot}] ${hex}`;
      if (isMasked(masks, element.id, slot)) {
        chip.classList.add('masked');
        chip.textContent = 'M';
      }
      chip.addEventListener('click', () => handlers.onToggleMask(element.id, slot));
      chips.appendChild(chip);
    });
    box.appendChild(chips);
    container.appendChild(box);
  }
}

export function renderSuggestions(
  container: HTMLElement,
  suggestions: Suggestion[],
  handlers: Handlers,
  disabled: boolean,
): void {
  clear(container);
  for (const suggestion of suggestions) {
    const row = document.createElement('div');
    row.className = `suggestion suggestion-${suggestion.resolution}`;
    row.dataset.element = suggestion.element;
    row.dataset.slot = String(suggestion.slot);

    const swatch = document.createElement('span');
    swatch.className = 'suggestion-swatch';
    swatch.dataset.hex = suggestion.hex;
    swatch.style.background = suggestion.hex;
    row.appendChild(swatch);

    const label = document.createElement('span');
    label.className = 'suggestion-label';
    label.textContent = `${suggestion.element}[${suggestion.slot}] ${suggestion.hex}`;
    row.appendChild(label);

    if (suggestion.resolution === 'pending') {
      const accept = document.createElement('button');
      accept.type = 'button';
      accept.className = 'accept';
      accept.textContent = 'accept';
      accept.disabled = disabled;
      accept.addEventListener('click', () => handlers.onAccept(suggestion.element, suggestion.slot));
      row.appendChild(accept);

      const reject = document.createElement('button');
      reject.type = 'button';
      reject.className = 'reject';
      reject.textContent = 'reject';
      reject.disabled = disabled;
      reject.addEventListener('click', () => handlers.onReject(suggestion.element, suggestion.slot));
      row.appendChild(reject);
    } else {
      const mark = document.createElement('span');
      mark.className = 'resolution';
      mark.textContent = suggestion.resolution;
      row.appendChild(mark);
    }
    container.appendChild(row);
  }
}

export function renderGenerated(
  container: HTMLElement,
  palette: string[] | null,
  handlers: Handlers,
): void {
  clear(container);
  if (!palette) return;
  for (const hex of palette) {
    const cell = document.createElement('div');
    cell.className = 'gen-swatch';
    cell.dataset.hex = hex;

    const color = document.createElement('span');
    color.className = 'gen-color';
    color.style.background = hex;
    cell.appendChild(color);

    const label = document.createElement('span');
    label.className = 'gen-label';
    label.textContent = hex;
    cell.appendChild(label);

    const copy = document.createElement('button');
    copy.type = 'button';
    copy.className = 'copy-hex';
    copy.dataset.hex = hex;
    copy.textContent = 'copy';
    copy.addEventListener('click', () => handlers.onCopy(hex));
    cell.appendChild(copy);

    container.appendChild(cell);
  }
}

export function renderNotices(banner: HTMLElement, toast: HTMLElement, state: StudioState): void {
  banner.textContent = state.banner ?? '';
  banner.hidden = state.banner === null;
  toast.textContent = state.toast ?? '';
  toast.hidden = state.toast === null;
}
