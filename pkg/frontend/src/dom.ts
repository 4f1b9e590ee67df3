// Small DOM builders. Every form control gets a real <label for=...> so
// screen readers and keyboard users get the same interface.

let idCounter = 0;

export function freshId(prefix: string): string {
  idCounter += 1;
  return `${prefix}-${idCounter}`;
}

type Child = Node | string;

export function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  children: Child[] = [],
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [name, value] of Object.entries(attrs)) {
    node.setAttribute(name, value);
  }
  for (const child of children) {
    node.append(child);
  }
  return node;
}

export function labeled(labelText: string, control: HTMLElement): HTMLDivElement {
  if (!control.id) control.id = freshId("field");
  const label = el("label", { for: control.id }, [labelText]);
  return el("div", { class: "field" }, [label, control]);
}

export function option(value: string, text?: string): HTMLOptionElement {
  return el("option", { value }, [text ?? value]);
}

export function clear(node: HTMLElement): void {
  while (node.firstChild) node.removeChild(node.firstChild);
}

export function banner(message: string): HTMLDivElement {
  return el("div", { class: "banner", role: "alert" }, [message]);
}
