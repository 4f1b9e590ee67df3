import { ApiClient } from "./api";
import { createApp } from "./app";

const api = new ApiClient("");

async function boot(): Promise<void> {
  const mount = document.getElementById("app");
  if (!mount) throw new Error("missing #app mount point");
  const catalog = await api.catalog();
  mount.append(createApp(catalog, api));
}

void boot();
